#include "tml/potential.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "tml/errors.hpp"
#include "tml/hash.hpp"
#include "tml/rng.hpp"

namespace tml {

namespace {

constexpr long double kTwoPiL = 6.283185307179586476925286766559005768L;

struct FamilyEntry {
    Family family;
    std::string_view name;
};

constexpr FamilyEntry kFamilies[] = {
    {Family::zero, "zero"},
    {Family::constant, "constant"},
    {Family::power_decay, "power_decay"},
    {Family::cos_power, "cos_power"},
    {Family::almost_mathieu, "almost_mathieu"},
    {Family::random_decay, "random_decay"},
    {Family::sparse_composite, "sparse_composite"},
    {Family::bernoulli, "bernoulli"},
    {Family::periodic, "periodic"},
    {Family::shifted, "shifted"},
    {Family::from_file, "from_file"},
    {Family::polynomial_cos, "polynomial_cos"},
};

long double frac(long double x) { return x - std::floor(x); }

double cos_power_value(double lambda, double beta, std::int64_t n) {
    // n^beta reaches ~1e10 for the shifts used in right-limit searches; reduce it modulo 2 pi
    // in extended precision so the cosine argument keeps its absolute accuracy.
    long double x = std::pow(static_cast<long double>(n), static_cast<long double>(beta));
    long double r = std::fmod(x, kTwoPiL);
    return lambda * std::cos(static_cast<double>(r));
}

// sum_l coeffs[l] n^l modulo 1
double poly_phase(const std::vector<double>& coeffs, std::int64_t n) {
    long double acc = 0.0L;
    long double pw = 1.0L;
    for (double b : coeffs) {
        acc += frac(static_cast<long double>(b) * pw);
        pw *= static_cast<long double>(n);
    }
    return static_cast<double>(frac(acc));
}

double sparse_value(const PotentialSpec& s, std::int64_t n) {
    std::int64_t pos = 0;
    for (std::size_t j = 0; j < s.gaps.size(); ++j) {
        pos += s.gaps[j];
        if (n <= pos) return 0.0;
        if (n <= pos + s.blocks[j]) {
            return std::pow(static_cast<double>(n - pos), -s.alpha) * counter_uniform_pm1(s.seed, n);
        }
        pos += s.blocks[j];
    }
    return 0.0;
}

nlohmann::json int_list(const std::vector<std::int64_t>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (auto x : v) a.push_back(x);
    return a;
}

std::vector<std::int64_t> read_int_list(const nlohmann::json& j, const char* key) {
    if (!j.is_array()) throw InvalidArgument(std::string("potential: '") + key + "' must be an array of integers");
    std::vector<std::int64_t> out;
    for (const auto& x : j) {
        if (!x.is_number_integer()) throw InvalidArgument(std::string("potential: '") + key + "' must hold integers");
        out.push_back(x.get<std::int64_t>());
    }
    return out;
}

std::vector<double> read_real_list(const nlohmann::json& j, const char* key) {
    if (!j.is_array()) throw InvalidArgument(std::string("potential: '") + key + "' must be an array of reals");
    std::vector<double> out;
    for (const auto& x : j) {
        if (!x.is_number()) throw InvalidArgument(std::string("potential: '") + key + "' must hold reals");
        out.push_back(x.get<double>());
    }
    return out;
}

double read_real(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) throw InvalidArgument(std::string("potential: missing '") + key + "'");
    if (!j.at(key).is_number()) throw InvalidArgument(std::string("potential: '") + key + "' must be a number");
    return j.at(key).get<double>();
}

double read_real_or(const nlohmann::json& j, const char* key, double dflt) {
    return j.contains(key) ? read_real(j, key) : dflt;
}

std::uint64_t read_seed(const nlohmann::json& j) {
    if (!j.contains("seed")) return 0;
    const auto& s = j.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0))
        throw InvalidArgument("potential: 'seed' must be a non-negative integer");
    return s.get<std::uint64_t>();
}

}  // namespace

std::string_view family_name(Family f) {
    for (const auto& e : kFamilies)
        if (e.family == f) return e.name;
    return "unknown";
}

Family family_from_name(std::string_view name) {
    for (const auto& e : kFamilies)
        if (e.name == name) return e.family;
    throw InvalidArgument("unknown potential family '" + std::string(name) + "'");
}

double PotentialSpec::eval(std::int64_t n) const {
    if (domain == Domain::half_line && n < 0) throw DomainError("half-line potential evaluated at n < 0");
    const std::int64_t an = n < 0 ? -n : n;
    switch (family) {
        case Family::zero:
            return 0.0;
        case Family::constant:
            return c;
        case Family::power_decay:
            return an == 0 ? 0.0 : c * std::pow(static_cast<double>(an), -alpha);
        case Family::cos_power:
            return cos_power_value(lambda, beta, an);
        case Family::almost_mathieu: {
            long double ph = frac(static_cast<long double>(alpha) * static_cast<long double>(n));
            return lambda * std::cos(static_cast<double>(kTwoPiL * ph) + theta0);
        }
        case Family::random_decay:
            return an == 0 ? 0.0
                           : lambda * std::pow(static_cast<double>(an), -alpha) * counter_uniform_pm1(seed, n);
        case Family::sparse_composite:
            if (n < 0) throw DomainError("sparse_composite is one-sided");
            return n == 0 ? 0.0 : sparse_value(*this, n);
        case Family::bernoulli:
            if (n < 0) throw DomainError("bernoulli potential is one-sided");
            return n == 0 ? 0.0 : lambda * bernoulli_term(n);
        case Family::periodic: {
            auto q = static_cast<std::int64_t>(values.size());
            std::int64_t k = ((n - 1) % q + q) % q;
            return values[static_cast<std::size_t>(k)];
        }
        case Family::shifted:
            return base->eval(n + shift);
        case Family::from_file:
            if (n < 0) throw DomainError("file potential is one-sided");
            if (n == 0) return 0.0;
            if (n > static_cast<std::int64_t>(values.size()))
                throw DomainError("file potential has " + std::to_string(values.size()) + " sites, asked for " +
                                  std::to_string(n));
            return values[static_cast<std::size_t>(n - 1)];
        case Family::polynomial_cos:
            return lambda * std::cos(2.0 * std::numbers::pi * poly_phase(values, n));
    }
    throw InvalidArgument("unhandled potential family");
}

std::optional<double> PotentialSpec::bound() const {
    auto max_abs = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    };
    switch (family) {
        case Family::zero:
            return 0.0;
        case Family::constant:
        case Family::power_decay:
            return std::abs(c);
        case Family::cos_power:
        case Family::almost_mathieu:
        case Family::polynomial_cos:
        case Family::bernoulli:
            return std::abs(lambda);
        case Family::random_decay:
            if (alpha >= 0.0) return std::abs(lambda);
            return std::nullopt;
        case Family::sparse_composite:
            return 1.0;
        case Family::periodic:
        case Family::from_file:
            return max_abs(values);
        case Family::shifted:
            return base ? base->bound() : std::nullopt;
    }
    return std::nullopt;
}

void PotentialSpec::validate() const {
    auto finite = [](double x) { return std::isfinite(x); };
    if (!finite(c) || !finite(alpha) || !finite(beta) || !finite(lambda) || !finite(theta0))
        throw InvalidArgument("potential parameters must be finite");
    switch (family) {
        case Family::power_decay:
            if (!(alpha > 0.0)) throw InvalidArgument("power_decay needs alpha > 0");
            break;
        case Family::cos_power:
            if (!(beta > 1.0)) throw InvalidArgument("cos_power needs beta > 1");
            break;
        case Family::random_decay:
            if (alpha < 0.0) throw InvalidArgument("random_decay needs alpha >= 0");
            break;
        case Family::sparse_composite:
            if (gaps.size() != blocks.size()) throw InvalidArgument("sparse_composite: gaps and blocks differ in length");
            for (std::size_t j = 0; j < gaps.size(); ++j)
                if (gaps[j] < 0 || blocks[j] < 0) throw InvalidArgument("sparse_composite: negative gap or block length");
            if (!(alpha >= 0.0 && alpha < 0.5)) throw InvalidArgument("sparse_composite needs 0 <= alpha < 1/2");
            if (domain != Domain::half_line) throw InvalidArgument("sparse_composite is a half-line family");
            break;
        case Family::bernoulli:
            if (domain != Domain::half_line) throw InvalidArgument("bernoulli is a half-line family");
            break;
        case Family::periodic:
            if (values.empty()) throw InvalidArgument("periodic potential needs a nonempty cycle");
            break;
        case Family::from_file:
            if (values.empty()) throw InvalidArgument("file potential is empty");
            break;
        case Family::shifted:
            if (!base) throw InvalidArgument("shifted potential without base");
            base->validate();
            break;
        case Family::polynomial_cos:
            if (values.empty()) throw InvalidArgument("polynomial_cos needs coefficients");
            break;
        default:
            break;
    }
    for (double v : values)
        if (!finite(v)) throw InvalidArgument("potential values must be finite");
}

nlohmann::json PotentialSpec::to_json() const {
    nlohmann::json j;
    j["family"] = std::string(family_name(family));
    j["domain"] = domain == Domain::half_line ? "half_line" : "whole_line";
    switch (family) {
        case Family::zero:
            break;
        case Family::constant:
            j["c"] = c;
            break;
        case Family::power_decay:
            j["c"] = c;
            j["alpha"] = alpha;
            break;
        case Family::cos_power:
            j["lambda"] = lambda;
            j["beta"] = beta;
            break;
        case Family::almost_mathieu:
            j["lambda"] = lambda;
            j["alpha"] = alpha;
            j["theta0"] = theta0;
            break;
        case Family::random_decay:
            j["alpha"] = alpha;
            j["seed"] = seed;
            j["lambda"] = lambda;
            break;
        case Family::sparse_composite:
            j["alpha"] = alpha;
            j["seed"] = seed;
            j["gaps"] = int_list(gaps);
            j["blocks"] = int_list(blocks);
            break;
        case Family::bernoulli:
            j["lambda"] = lambda;
            break;
        case Family::periodic:
            j["values"] = values;
            break;
        case Family::shifted:
            j["base"] = base->to_json();
            j["shift"] = shift;
            break;
        case Family::from_file: {
            j["path"] = path;
            std::ostringstream os;
            os.precision(17);
            for (double v : values) os << v << '\n';
            j["content_hash"] = hex64(fnv1a64(os.str()));
            break;
        }
        case Family::polynomial_cos:
            j["lambda"] = lambda;
            j["coeffs"] = values;
            break;
    }
    return j;
}

PotentialSpec PotentialSpec::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw InvalidArgument("potential must be an object");
    if (!j.contains("family") || !j.at("family").is_string()) throw InvalidArgument("potential: missing 'family'");
    PotentialSpec s;
    s.family = family_from_name(j.at("family").get<std::string>());
    if (j.contains("domain")) {
        const auto& d = j.at("domain");
        if (d == "half_line")
            s.domain = Domain::half_line;
        else if (d == "whole_line")
            s.domain = Domain::whole_line;
        else
            throw InvalidArgument("potential: domain must be half_line or whole_line");
    }
    std::vector<std::string> allowed{"family", "domain"};
    switch (s.family) {
        case Family::zero:
            break;
        case Family::constant:
            s.c = read_real(j, "c");
            allowed.insert(allowed.end(), {"c"});
            break;
        case Family::power_decay:
            s.c = read_real(j, "c");
            s.alpha = read_real(j, "alpha");
            allowed.insert(allowed.end(), {"c", "alpha"});
            break;
        case Family::cos_power:
            s.lambda = read_real(j, "lambda");
            s.beta = read_real(j, "beta");
            allowed.insert(allowed.end(), {"lambda", "beta"});
            break;
        case Family::almost_mathieu:
            s.lambda = read_real(j, "lambda");
            s.alpha = read_real(j, "alpha");
            s.theta0 = read_real_or(j, "theta0", 0.0);
            allowed.insert(allowed.end(), {"lambda", "alpha", "theta0"});
            break;
        case Family::random_decay:
            s.alpha = read_real(j, "alpha");
            s.seed = read_seed(j);
            s.lambda = read_real_or(j, "lambda", 1.0);
            allowed.insert(allowed.end(), {"alpha", "seed", "lambda"});
            break;
        case Family::sparse_composite:
            s.alpha = read_real(j, "alpha");
            s.seed = read_seed(j);
            if (!j.contains("gaps") || !j.contains("blocks")) throw InvalidArgument("sparse_composite needs gaps and blocks");
            s.gaps = read_int_list(j.at("gaps"), "gaps");
            s.blocks = read_int_list(j.at("blocks"), "blocks");
            allowed.insert(allowed.end(), {"alpha", "seed", "gaps", "blocks"});
            break;
        case Family::bernoulli:
            s.lambda = read_real_or(j, "lambda", 1.0);
            allowed.insert(allowed.end(), {"lambda"});
            break;
        case Family::periodic:
            if (!j.contains("values")) throw InvalidArgument("periodic needs 'values'");
            s.values = read_real_list(j.at("values"), "values");
            allowed.insert(allowed.end(), {"values"});
            break;
        case Family::shifted:
            if (!j.contains("base")) throw InvalidArgument("shifted needs 'base'");
            s.base = std::make_shared<const PotentialSpec>(from_json(j.at("base")));
            if (!j.contains("shift") || !j.at("shift").is_number_integer())
                throw InvalidArgument("shifted needs an integer 'shift'");
            s.shift = j.at("shift").get<std::int64_t>();
            if (!j.contains("domain")) s.domain = s.base->domain;
            allowed.insert(allowed.end(), {"base", "shift"});
            break;
        case Family::from_file: {
            if (!j.contains("path") || !j.at("path").is_string()) throw InvalidArgument("from_file needs 'path'");
            PotentialSpec f = tml::from_file(j.at("path").get<std::string>());
            f.domain = s.domain;
            s = f;
            allowed.insert(allowed.end(), {"path", "content_hash"});
            break;
        }
        case Family::polynomial_cos:
            s.lambda = read_real_or(j, "lambda", 1.0);
            if (!j.contains("coeffs")) throw InvalidArgument("polynomial_cos needs 'coeffs'");
            s.values = read_real_list(j.at("coeffs"), "coeffs");
            allowed.insert(allowed.end(), {"lambda", "coeffs"});
            break;
    }
    for (const auto& [key, _] : j.items())
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw InvalidArgument("potential (" + std::string(family_name(s.family)) + "): unknown key '" + key + "'");
    s.validate();
    return s;
}

std::uint64_t PotentialSpec::fingerprint() const { return fnv1a64(to_json().dump()); }

PotentialSpec zero_potential(Domain d) {
    PotentialSpec s;
    s.domain = d;
    return s;
}

PotentialSpec constant_potential(double c, Domain d) {
    PotentialSpec s;
    s.family = Family::constant;
    s.c = c;
    s.domain = d;
    s.validate();
    return s;
}

PotentialSpec power_decay(double c0, double alpha) {
    PotentialSpec s;
    s.family = Family::power_decay;
    s.c = c0;
    s.alpha = alpha;
    s.validate();
    return s;
}

PotentialSpec cos_power(double lambda, double beta, Domain d) {
    PotentialSpec s;
    s.family = Family::cos_power;
    s.lambda = lambda;
    s.beta = beta;
    s.domain = d;
    s.validate();
    return s;
}

PotentialSpec almost_mathieu(double lambda, double alpha, double theta0, Domain d) {
    PotentialSpec s;
    s.family = Family::almost_mathieu;
    s.lambda = lambda;
    s.alpha = alpha;
    s.theta0 = theta0;
    s.domain = d;
    s.validate();
    return s;
}

PotentialSpec random_decay(double alpha, std::uint64_t seed, double lambda, Domain d) {
    PotentialSpec s;
    s.family = Family::random_decay;
    s.alpha = alpha;
    s.seed = seed;
    s.lambda = lambda;
    s.domain = d;
    s.validate();
    return s;
}

PotentialSpec sparse_composite(double alpha, std::uint64_t seed, std::vector<std::int64_t> gaps,
                               std::vector<std::int64_t> blocks) {
    PotentialSpec s;
    s.family = Family::sparse_composite;
    s.alpha = alpha;
    s.seed = seed;
    s.gaps = std::move(gaps);
    s.blocks = std::move(blocks);
    s.validate();
    return s;
}

PotentialSpec bernoulli_potential(double lambda) {
    PotentialSpec s;
    s.family = Family::bernoulli;
    s.lambda = lambda;
    return s;
}

PotentialSpec periodic_potential(std::vector<double> cycle, Domain d) {
    PotentialSpec s;
    s.family = Family::periodic;
    s.values = std::move(cycle);
    s.domain = d;
    s.validate();
    return s;
}

PotentialSpec shifted(const PotentialSpec& base, std::int64_t n0) {
    PotentialSpec s;
    s.family = Family::shifted;
    s.base = std::make_shared<const PotentialSpec>(base);
    s.shift = n0;
    s.domain = base.domain;
    return s;
}

PotentialSpec table_potential(std::vector<double> values, std::string path) {
    PotentialSpec s;
    s.family = Family::from_file;
    s.values = std::move(values);
    s.path = std::move(path);
    s.validate();
    return s;
}

PotentialSpec from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open potential file '" + path + "'");
    std::vector<double> vals;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        std::istringstream ls(line);
        double v;
        if (!(ls >> v)) throw InvalidArgument(path + ":" + std::to_string(lineno) + ": not a real number");
        std::string rest;
        if (ls >> rest) throw InvalidArgument(path + ":" + std::to_string(lineno) + ": one value per line expected");
        vals.push_back(v);
    }
    return table_potential(std::move(vals), path);
}

PotentialSpec polynomial_cos(double lambda, std::vector<double> coeffs, Domain d) {
    PotentialSpec s;
    s.family = Family::polynomial_cos;
    s.lambda = lambda;
    s.values = std::move(coeffs);
    s.domain = d;
    s.validate();
    return s;
}

int bernoulli_term(std::int64_t n) {
    if (n < 1) throw DomainError("bernoulli_term: n >= 1 required");
    std::uint64_t idx = static_cast<std::uint64_t>(n - 1);
    for (unsigned len = 1; len < 62; ++len) {
        std::uint64_t block = static_cast<std::uint64_t>(len) << len;  // len * 2^len symbols
        if (idx < block) {
            std::uint64_t word = idx / len;
            unsigned pos = static_cast<unsigned>(idx % len);
            return static_cast<int>((word >> (len - 1 - pos)) & 1u);
        }
        idx -= block;
    }
    throw DomainError("bernoulli_term: index too large");
}

std::vector<int> bernoulli_sequence(std::int64_t K) {
    if (K < 1) throw InvalidArgument("bernoulli_sequence: K >= 1 required");
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(K));
    for (std::int64_t n = 1; n <= K; ++n) out.push_back(bernoulli_term(n));
    return out;
}

double shift_distance(const PotentialSpec& V, const PotentialSpec& W, std::int64_t n0, std::int64_t N) {
    if (n0 < 0 || N < 1) throw InvalidArgument("shift_distance: n0 >= 0 and N >= 1 required");
    if (n0 > std::numeric_limits<std::int64_t>::max() - N) throw DomainError("shift_distance: index overflow");
    double worst = 0.0;
    for (std::int64_t n = 1; n <= N; ++n) worst = std::max(worst, std::abs(V.eval(n + n0) - W.eval(n)));
    return worst;
}

}  // namespace tml
