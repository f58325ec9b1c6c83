#include "bianiso/cli.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace bianiso;
using namespace bianiso::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("bianiso_test_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path write(const fs::path& dir, const std::string& text) {
    const fs::path f = dir / "run.yaml";
    std::ofstream(f) << text;
    return f;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

const char* kSlab = R"(units: normalized
mode: scattering
materials:
  coat: {model: index, n: 2.0}
stack:
  left: vacuum
  layers:
    - {material: coat, thickness: 0.125}
  right: vacuum
sweep:
  omega: {min: 6.283185307179586, max: 6.283185307179586, count: 1}
  angles_deg: [0]
)";

}  // namespace

TEST_CASE("shipped sample configs validate cleanly") {
    for (const char* name : {"scattering.yaml", "initial_value.yaml", "time_reconstruction.yaml"}) {
        const auto d = validate(std::string(BIANISO_CONFIG_DIR) + "/" + name);
        INFO(name);
        CHECK(d.empty());
    }
}

TEST_CASE("quarter-wave row through the full pipeline") {
    const auto dir = scratch("qw");
    const auto cfg = write(dir, kSlab);
    std::ostringstream err;
    RunOptions opt;
    opt.overrides.output_dir = (dir / "out").string();
    REQUIRE(run(cfg.string(), opt, err) == exit_ok);
    std::istringstream csv(slurp(dir / "out" / "result.csv"));
    std::string header, row;
    std::getline(csv, header);
    std::getline(csv, row);
    CHECK(header.rfind("omega,kx,ky,re_r_ss", 0) == 0);
    std::vector<std::string> cells;
    std::stringstream rs(row);
    for (std::string c; std::getline(rs, c, ',');) cells.push_back(c);
    REQUIRE(cells.size() == 23);
    CHECK(std::abs(std::stod(cells[19]) - 0.36) < 1e-8);  // R_s
    CHECK(fs::exists(dir / "out" / "result.json"));
}

TEST_CASE("vacuum stack reflects nothing") {
    const auto dir = scratch("vac");
    std::string text = kSlab;
    text.replace(text.find("coat, thickness"), 4, "vacuum");
    const auto cfg = write(dir, text);
    std::ostringstream err;
    RunOptions opt;
    opt.overrides.output_dir = (dir / "out").string();
    REQUIRE(run(cfg.string(), opt, err) == exit_ok);
    std::istringstream csv(slurp(dir / "out" / "result.csv"));
    std::string line;
    std::getline(csv, line);
    std::getline(csv, line);
    std::vector<std::string> cells;
    std::stringstream rs(line);
    for (std::string c; std::getline(rs, c, ',');) cells.push_back(c);
    CHECK(std::abs(std::stod(cells[19])) < 1e-20);
    CHECK(std::abs(std::stod(cells[20])) < 1e-20);
}

TEST_CASE("negative thickness is an invalid config with no outputs") {
    const auto dir = scratch("neg");
    std::string text = kSlab;
    text.replace(text.find("0.125"), 5, "-0.1");
    const auto cfg = write(dir, text);
    std::ostringstream err;
    RunOptions opt;
    opt.overrides.output_dir = (dir / "out").string();
    CHECK(run(cfg.string(), opt, err) == exit_invalid_config);
    CHECK(err.str().find("invalid-config") != std::string::npos);
    CHECK(err.str().find(":8: error: stack.layers[0].thickness") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("unknown model names the region") {
    const auto dir = scratch("unknown");
    std::string text = kSlab;
    text.replace(text.find("model: index"), 12, "model: plasma");
    const auto d = validate(write(dir, text).string());
    REQUIRE(d.size() == 1);
    CHECK(d[0].severity == Diagnostic::Severity::error);
    CHECK(d[0].message.find("stack.layers[0]") != std::string::npos);
    CHECK(d[0].line == 4);
}

TEST_CASE("negative damping is only a warning") {
    const auto dir = scratch("gain");
    std::string text = kSlab;
    text.replace(text.find("{model: index, n: 2.0}"), 22,
                 "{model: poles, chi1: [{amplitude: 1.0, omega0: 2.0, gamma: -0.1}]}");
    const auto d = validate(write(dir, text).string());
    REQUIRE(d.size() == 1);
    CHECK(d[0].severity == Diagnostic::Severity::warning);
    CHECK(d[0].field == "materials.coat.chi1[0].gamma");
}

TEST_CASE("structural errors") {
    const auto dir = scratch("struct");
    auto diag_for = [&](const std::string& text) { return validate(write(dir, text).string()); };
    std::string no_mode = kSlab;
    no_mode.erase(no_mode.find("mode: scattering\n"), 17);
    CHECK(has_errors(diag_for(no_mode)));
    std::string zero = kSlab;
    zero.replace(zero.find("count: 1"), 8, "count: 0");
    CHECK(has_errors(diag_for(zero)));
    CHECK(has_errors(diag_for("mode: [scattering, initial-value]\n")));
    CHECK(has_errors(diag_for("units: normalized\n  bad: [\n")));
    std::string glass = kSlab;
    glass.replace(glass.find("right: vacuum"), 13, "right: coat");
    CHECK(has_errors(diag_for(glass)));
    CHECK_THROWS(validate((dir / "missing.yaml").string()));
}

TEST_CASE("numerical failures name the sweep point") {
    const auto dir = scratch("numfail");
    // An undamped resonance exactly on a sweep frequency.
    std::string text = kSlab;
    text.replace(text.find("{model: index, n: 2.0}"), 22,
                 "{model: poles, chi1: [{amplitude: 1.0, omega0: 6.283185307179586, gamma: 0.0}]}");
    std::ostringstream err;
    RunOptions opt;
    opt.overrides.output_dir = (dir / "out").string();
    CHECK(run(write(dir, text).string(), opt, err) == exit_numerical_failure);
    CHECK(err.str().find("numerical-failure at (omega=6.2831853071795862, kx=0, ky=0)") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("config hash") {
    CHECK(fnv1a("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
}
