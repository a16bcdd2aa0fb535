#include "tml/tml.h"

#include <cstring>
#include <string>

#include "tml/errors.hpp"
#include "tml/experiments.hpp"
#include "tml/potential.hpp"
#include "tml/spectral.hpp"
#include "tml/transfer.hpp"

struct tml_potential {
    tml::PotentialSpec spec;
};

namespace {

thread_local std::string g_error;

template <class F>
tml_status guard(F&& f) {
    try {
        g_error.clear();
        f();
        return TML_OK;
    } catch (const tml::InvalidArgument& e) {
        g_error = e.what();
        return TML_INVALID_ARGUMENT;
    } catch (const nlohmann::json::exception& e) {
        g_error = e.what();
        return TML_INVALID_ARGUMENT;
    } catch (const tml::DomainError& e) {
        g_error = e.what();
        return TML_DOMAIN_ERROR;
    } catch (const tml::Refusal& e) {
        g_error = e.what();
        return TML_REFUSED;
    } catch (const std::exception& e) {
        g_error = e.what();
        return TML_INTERNAL;
    } catch (...) {
        g_error = "unknown error";
        return TML_INTERNAL;
    }
}

void need(const void* p, const char* what) {
    if (!p) throw tml::InvalidArgument(std::string(what) + " is null");
}

tml::Boundary to_bc(tml_boundary bc) {
    switch (bc) {
        case TML_DIRICHLET: return tml::Boundary::dirichlet;
        case TML_NEUMANN: return tml::Boundary::neumann_paper;
    }
    throw tml::InvalidArgument("unknown boundary condition");
}

}  // namespace

extern "C" {

const char* tml_last_error(void) { return g_error.c_str(); }

const char* tml_version(void) { return "1.0.0"; }

tml_status tml_potential_create_json(const char* json, tml_potential** out) {
    return guard([&] {
        need(json, "json");
        need(out, "out");
        *out = nullptr;
        auto spec = tml::PotentialSpec::from_json(nlohmann::json::parse(json));
        *out = new tml_potential{std::move(spec)};
    });
}

void tml_potential_destroy(tml_potential* p) { delete p; }

tml_status tml_potential_eval(const tml_potential* p, int64_t n, double* out) {
    return guard([&] {
        need(p, "potential");
        need(out, "out");
        *out = p->spec.eval(n);
    });
}

uint64_t tml_potential_fingerprint(const tml_potential* p) { return p ? p->spec.fingerprint() : 0; }

tml_status tml_transfer(const tml_potential* p, double E, int64_t n, int64_t m, double mat[4], double* log_scale) {
    return guard([&] {
        need(p, "potential");
        need(mat, "mat");
        need(log_scale, "log_scale");
        auto T = tml::transfer(p->spec, E, n, m);
        auto a = T.mat();
        mat[0] = a.a11;
        mat[1] = a.a12;
        mat[2] = a.a21;
        mat[3] = a.a22;
        *log_scale = T.log_scale();
    });
}

tml_status tml_norm_trajectory(const tml_potential* p, double E, int64_t L, double* out) {
    return guard([&] {
        need(p, "potential");
        need(out, "out");
        auto v = tml::norm_trajectory(p->spec, E, L);
        std::memcpy(out, v.data(), v.size() * sizeof(double));
    });
}

tml_status tml_m_function(const tml_potential* p, double re, double im, tml_boundary bc, int64_t depth, double* out_re,
                          double* out_im) {
    return guard([&] {
        need(p, "potential");
        need(out_re, "out_re");
        need(out_im, "out_im");
        auto m = tml::m_function(p->spec, {re, im}, to_bc(bc), depth);
        *out_re = m.real();
        *out_im = m.imag();
    });
}

tml_status tml_eig(const tml_potential* p, int64_t N, tml_boundary bc, double* E, double* w) {
    return guard([&] {
        need(p, "potential");
        need(E, "E");
        need(w, "w");
        auto s = tml::eig(p->spec, N, to_bc(bc));
        std::memcpy(E, s.E.data(), s.E.size() * sizeof(double));
        std::memcpy(w, s.w.data(), s.w.size() * sizeof(double));
    });
}

tml_status tml_bernoulli_sequence(int64_t K, int* out) {
    return guard([&] {
        need(out, "out");
        if (K < 0) throw tml::InvalidArgument("K must be non-negative");
        auto b = tml::bernoulli_sequence(K);
        std::memcpy(out, b.data(), b.size() * sizeof(int));
    });
}

tml_status tml_run_experiment(const char* config_json, const char* out_dir, int threads, int* exit_code) {
    return guard([&] {
        need(config_json, "config_json");
        need(exit_code, "exit_code");
        auto r = tml::run_experiment_text(config_json, out_dir ? out_dir : ".", threads);
        *exit_code = r.exit_code;
        g_error = r.message;
    });
}

const char* tml_experiment_names(void) {
    static const std::string names = [] {
        std::string s;
        for (const auto& n : tml::experiment_names()) s += n + "\n";
        return s;
    }();
    return names.c_str();
}

tml_status tml_describe(const char* experiment, char* buf, size_t buflen, size_t* needed) {
    tml_status st = TML_OK;
    auto g = guard([&] {
        need(experiment, "experiment");
        auto d = tml::describe_experiment(experiment);
        if (!d) throw tml::InvalidArgument(std::string("unknown experiment '") + experiment + "'");
        if (needed) *needed = d->size() + 1;
        if (!buf || buflen < d->size() + 1) {
            st = TML_BUFFER_TOO_SMALL;
            return;
        }
        std::memcpy(buf, d->c_str(), d->size() + 1);
    });
    if (g == TML_OK && st != TML_OK) g_error = "buffer too small";
    return g != TML_OK ? g : st;
}

}  // extern "C"
