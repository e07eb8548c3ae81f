// holoatlas: verification suite and data export for the glued surface and
// its bundles. Exit codes: 0 pass, 1 verification failure, 2 input error.

#include <holoatlas/cli.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

using namespace holoatlas;
using nlohmann::json;

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::ParseError, "cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ParseError, "'" + path + "': " + e.what());
    }
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out)
        throw Error(ErrorKind::ParseError, "cannot write '" + out_path + "'");
    out << text;
}

struct Options {
    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> sigma_fault;
};

cli::Config load_config(const Options& o) {
    std::string path = o.config_path;
    if (path.empty())
        if (const char* env = std::getenv("HOLOATLAS_CONFIG"))
            path = env;
    cli::Config c;
    if (!path.empty())
        c = cli::config_from_json(read_json_file(path));
    if (o.seed)
        c.seed = *o.seed;
    if (o.sigma_fault)
        c.sigma_fault = cli::parse_sigma_fault(*o.sigma_fault);
    c.validate();
    return c;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Holomorphic atlas verification and export"};
    app.require_subcommand(1);
    Options opt;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "JSON config (default: $HOLOATLAS_CONFIG or built-in)");
        sub->add_option("--out", opt.out_path, "write output here instead of stdout");
        sub->add_option("--seed", opt.seed, "override the config seed");
    };

    auto* verify = app.add_subcommand("verify", "run the verification suite and print a JSON report");
    common(verify);
    verify->add_option("--inject-sigma-fault", opt.sigma_fault,
                       "test hook: none, chart_a_squared or chart_b_simple_pole");

    auto* fibers = app.add_subcommand("fiber-moduli", "CSV of j along a sweep in w");
    common(fibers);
    cli::Sweep sweep;
    std::string kind = "radial";
    fibers->add_option("--sweep", kind, "radial or circular")->check(CLI::IsMember({"radial", "circular"}));
    fibers->add_option("--from", sweep.from, "radial: first |w|");
    fibers->add_option("--to", sweep.to, "radial: last |w|");
    fibers->add_option("--angle", sweep.angle, "radial: arg w");
    fibers->add_option("--radius", sweep.radius, "circular: |w|");
    fibers->add_option("--count", sweep.count, "number of points");

    auto* sections = app.add_subcommand("sections", "section counts and splitting type of a cocycle");
    common(sections);
    std::string cocycle_path;
    sections->add_option("cocycle", cocycle_path, "cocycle JSON file")->required();

    auto* exporter = app.add_subcommand("atlas-export", "JSON description of the atlas");
    common(exporter);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? cli::exit_pass : cli::exit_input_error;
    }

    try {
        const cli::Config config = load_config(opt);
        if (*verify) {
            const auto report = cli::cmd_verify(config);
            emit(cli::to_json(report, config).dump(2) + "\n", opt.out_path);
            return report.passed() ? cli::exit_pass : cli::exit_verification_failure;
        }
        if (*fibers) {
            sweep.kind = kind == "radial" ? cli::Sweep::Kind::Radial : cli::Sweep::Kind::Circular;
            emit(cli::to_csv(cli::cmd_fiber_moduli(config, sweep)), opt.out_path);
            return cli::exit_pass;
        }
        if (*sections) {
            const auto doc = read_json_file(cocycle_path);
            emit(cli::cmd_sections(config, doc).dump(2) + "\n", opt.out_path);
            return cli::exit_pass;
        }
        emit(cli::cmd_atlas_export(config).dump(2) + "\n", opt.out_path);
        return cli::exit_pass;
    } catch (const Error& e) {
        std::cerr << "holoatlas: " << to_string(e.kind()) << ": " << e.what() << "\n";
        const bool numerical = e.kind() == ErrorKind::RankUnstable || e.kind() == ErrorKind::SumMismatch ||
                               e.kind() == ErrorKind::RangeTooNarrow;
        return numerical ? cli::exit_verification_failure : cli::exit_input_error;
    }
}
