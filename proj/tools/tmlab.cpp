#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "tml/tml.h"

namespace {

std::vector<std::string> experiments() {
    std::vector<std::string> out;
    std::istringstream is(tml_experiment_names());
    for (std::string line; std::getline(is, line);)
        if (!line.empty()) out.push_back(line);
    return out;
}

int describe(const std::string& name) {
    std::size_t need = 0;
    tml_status st = tml_describe(name.c_str(), nullptr, 0, &need);
    if (st == TML_INVALID_ARGUMENT) {
        std::cerr << "tmlab: " << tml_last_error() << '\n';
        return 2;
    }
    std::string buf(need, '\0');
    if (tml_describe(name.c_str(), buf.data(), buf.size(), &need) != TML_OK) {
        std::cerr << "tmlab: " << tml_last_error() << '\n';
        return 1;
    }
    buf.resize(need - 1);
    std::cout << name << "\n" << buf << '\n';
    return 0;
}

int run(const std::string& name, const std::string& config_path, const std::string& out, int threads) {
    std::ifstream is(config_path);
    if (!is) {
        std::cerr << "tmlab: cannot read config " << config_path << '\n';
        return 2;
    }
    std::stringstream ss;
    ss << is.rdbuf();
    nlohmann::json cfg;
    try {
        cfg = nlohmann::json::parse(ss.str());
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "tmlab: config is not valid JSON: " << e.what() << '\n';
        return 2;
    }
    if (!cfg.is_object()) {
        std::cerr << "tmlab: config must be a JSON object\n";
        return 2;
    }
    if (!cfg.contains("experiment")) cfg["experiment"] = name;
    if (cfg["experiment"] != name) {
        std::cerr << "tmlab: config is for experiment " << cfg["experiment"] << ", not " << name << '\n';
        return 2;
    }
    int code = 1;
    std::string text = cfg.dump();
    if (tml_run_experiment(text.c_str(), out.c_str(), threads, &code) != TML_OK) {
        std::cerr << "tmlab: " << tml_last_error() << '\n';
        return 1;
    }
    if (code != 0) std::cerr << "tmlab: " << name << ": " << tml_last_error() << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Transfer-matrix and spectral-measure experiments"};
    app.require_subcommand(1);

    std::string config, out = ".";
    int threads = 0;
    std::string chosen;
    for (const auto& name : experiments()) {
        auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--config", config, "JSON config file")->required();
        sub->add_option("--out", out, "output directory");
        sub->add_option("--threads", threads, "worker threads (0: TMLAB_THREADS or hardware)");
        sub->callback([&chosen, name] { chosen = name; });
    }
    std::string what;
    auto* desc = app.add_subcommand("describe", "describe an experiment");
    desc->add_option("experiment", what, "experiment name")->required();
    auto* list = app.add_subcommand("list", "list experiments");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    if (desc->parsed()) return describe(what);
    if (list->parsed()) {
        for (const auto& n : experiments()) std::cout << n << '\n';
        return 0;
    }
    return run(chosen, config, out, threads);
}
