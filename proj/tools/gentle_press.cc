// gentle-press: experiment driver and blob compressor.
//
// Exit codes: 0 success, 2 configuration or input error, 3 infeasible estimate or
// failed-trial threshold exceeded, 1 anything else.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gpress/codec.h"
#include "gpress/harness.h"
#include "gpress/qmath_io.h"
#include "gpress/report.h"
#include "gpress/rng.h"
#include "gpress/tomography.h"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open " + path);
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string &path, const std::string &bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()))) {
        throw std::runtime_error("cannot write " + path);
    }
}

nlohmann::json read_json(const std::string &path) {
    try {
        return nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error &e) {
        throw InputError(path + ": " + e.what());
    }
}

gpress::SymbolSequence read_symbols(const std::string &path, int d) {
    std::istringstream in(read_file(path));
    gpress::SymbolSequence seq;
    seq.alphabet = d;
    std::string token;
    while (in >> token) {
        std::size_t used = 0;
        long v = -1;
        try {
            v = std::stol(token, &used);
        } catch (const std::exception &) {
            used = 0;
        }
        if (used != token.size() || v < 0 || v >= d) {
            throw InputError("symbol '" + token + "' is not in {0.." + std::to_string(d - 1) + "}");
        }
        seq.symbols.push_back(static_cast<std::uint8_t>(v));
    }
    return seq;
}

struct ExperimentArgs {
    std::string config;
    std::string out;
    std::string format = "json";
    int parallel = 1;
    std::optional<std::uint64_t> seed;
};

int run_experiment(const ExperimentArgs &args) {
    gpress::ExperimentConfig cfg;
    gpress::ReportFormat format;
    try {
        nlohmann::json j = read_json(args.config);
        if (args.seed) {
            j["seed"] = *args.seed;
        }
        cfg = gpress::ExperimentConfig::from_json(j);
        format = gpress::report_format_from_string(args.format);
    } catch (const gpress::ConfigError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    gpress::Report report = gpress::run_sweep(cfg, args.parallel);
    gpress::write_report(report, format, args.out);
    if (report.threshold_exceeded) {
        std::cerr << "failed-trial fraction exceeded max_failed_fraction\n";
        return kExitInfeasible;
    }
    return 0;
}

struct CompressArgs {
    std::string in;
    std::string state;
    std::uint64_t n = 0;
    double s = 0.2;
    std::string out;
    std::uint64_t seed = 0;
    int precision = 32;
    std::optional<double> delta;
};

int run_compress(const CompressArgs &args) {
    gpress::DensityMatrix rho = gpress::DensityMatrix::maximally_mixed(2);
    gpress::SymbolSequence symbols;
    double delta = 0;
    try {
        rho = gpress::state_from_json(read_json(args.state));
        symbols = read_symbols(args.in, rho.dim());
        if (symbols.symbols.size() != args.n) {
            throw InputError("symbol file holds " + std::to_string(symbols.symbols.size()) +
                             " symbols but --n is " + std::to_string(args.n));
        }
        if (!(args.s > 0 && args.s < 0.5)) {
            throw InputError("--s must lie in (0, 1/2)");
        }
        delta = args.delta ? *args.delta : std::pow(static_cast<double>(args.n), -args.s);
        if (!(delta >= 0 && delta < 1)) {
            throw InputError("--delta must lie in [0, 1)");
        }
    } catch (const InputError &e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument &e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const nlohmann::json::exception &e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitConfig;
    }

    // The source state is unknown to the encoder in principle; here it drives simulated
    // gentle tomography on n copies, and the resulting estimate fixes the code.
    gpress::Rng rng(args.seed);
    const int d = rho.dim();
    gpress::DensityMatrix estimate = rho;
    try {
        gpress::BlockSchedule schedule =
            gpress::block_schedule(static_cast<std::int64_t>(args.n), d, gpress::gell_mann_basis(d));
        gpress::BlockMeasurements meas = gpress::measure_blocks(rho, schedule, args.s, rng);
        estimate = gpress::feasibility_solve(meas.constraints, d);
    } catch (const gpress::InfeasibleError &e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const std::invalid_argument &e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitConfig;
    }
    gpress::RegularizedEstimate est =
        gpress::quantize_estimate(gpress::regularize(estimate, delta), args.precision);
    std::vector<std::uint8_t> bytes = gpress::serialize(gpress::encode(symbols, est));
    write_file(args.out, std::string(bytes.begin(), bytes.end()));
    return 0;
}

int run_decompress(const std::string &in, const std::string &out) {
    gpress::SymbolSequence symbols;
    try {
        std::string raw = read_file(in);
        std::vector<std::uint8_t> bytes(raw.begin(), raw.end());
        symbols = gpress::decode(gpress::parse_blob(bytes));
    } catch (const InputError &e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const gpress::FormatError &e) {
        std::cerr << "malformed blob: " << e.what() << "\n";
        return kExitConfig;
    }
    std::string text;
    text.reserve(symbols.symbols.size() * 2);
    for (std::uint8_t s : symbols.symbols) {
        text += std::to_string(s);
        text += '\n';
    }
    write_file(out, text);
    return 0;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"gentle-press: gentle tomography and universal compression simulator"};
    app.require_subcommand(1);

    ExperimentArgs exp;
    CLI::App *experiment = app.add_subcommand("experiment", "run a Monte Carlo sweep and write a report");
    experiment->add_option("--config", exp.config, "experiment config JSON")->required();
    experiment->add_option("--out", exp.out, "report path")->required();
    experiment->add_option("--format", exp.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    experiment->add_option("--parallel", exp.parallel, "worker threads")->check(CLI::PositiveNumber);
    experiment->add_option("--seed", exp.seed, "master seed (overrides the config)");

    CompressArgs comp;
    CLI::App *compress = app.add_subcommand("compress", "estimate the source by gentle tomography and encode symbols");
    compress->add_option("--in", comp.in, "symbols file (whitespace-separated integers)")->required();
    compress->add_option("--state", comp.state, "source state JSON {\"d\", \"bloch\"}")->required();
    compress->add_option("--n", comp.n, "number of copies (= number of symbols)")->required();
    compress->add_option("--s", comp.s, "bin exponent in (0, 1/2)")->required();
    compress->add_option("--out", comp.out, "blob path")->required();
    compress->add_option("--seed", comp.seed, "tomography seed");
    compress->add_option("--precision", comp.precision, "header precision B in [8, 62]")->check(CLI::Range(8, 62));
    compress->add_option("--delta", comp.delta, "regularization weight (default n^-s)");

    std::string dec_in, dec_out;
    CLI::App *decompress = app.add_subcommand("decompress", "decode a blob back to symbols");
    decompress->add_option("--in", dec_in, "blob path")->required();
    decompress->add_option("--out", dec_out, "symbols path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (experiment->parsed()) {
            return run_experiment(exp);
        }
        if (compress->parsed()) {
            return run_compress(comp);
        }
        return run_decompress(dec_in, dec_out);
    } catch (const InputError &e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
