#include "bianiso/cli.hpp"

#include "bianiso/errors.hpp"
#include "bianiso/synthesis.hpp"

#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

namespace bianiso::cli {

namespace {

namespace fs = std::filesystem;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::string> rows;  // formatted, without newline
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void append(std::string& row, double v) {
    if (!row.empty()) row += ',';
    row += fmt(v);
}

void append(std::string& row, cplx v) {
    append(row, v.real());
    append(row, v.imag());
}

void append(std::string& row, const std::string& s) {
    if (!row.empty()) row += ',';
    row += s;
}

std::vector<std::string> field_columns() {
    std::vector<std::string> c;
    for (const char* f : {"ex", "ey", "ez", "hx", "hy", "hz"}) {
        c.push_back(std::string("re_") + f);
        c.push_back(std::string("im_") + f);
    }
    return c;
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(n == 1 ? lo : lo + (hi - lo) * double(i) / double(n - 1));
    return out;
}

// Work items carry a label used when a point fails.
struct Failure {
    std::size_t index = 0;
    std::string message;
};

// Runs task(i) for i in [0, n) on a pool; the failure with the lowest index
// wins, which keeps the report independent of scheduling.
std::optional<Failure> parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& task,
                                    const std::function<std::string(std::size_t)>& label) {
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::mutex mu;
    std::optional<Failure> first;
    auto worker = [&] {
        for (;;) {
            if (stop.load()) return;
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                task(i);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(mu);
                if (!first || i < first->index) first = Failure{i, label(i) + ": " + e.what()};
                stop.store(true);
            }
        }
    };
    const int workers = int(std::min<std::size_t>(std::size_t(std::max(threads, 1)), std::max<std::size_t>(n, 1)));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return first;
}

std::string point_label(double omega, const KParallel& k) {
    return "at (omega=" + fmt(omega) + ", kx=" + fmt(k.kx) + ", ky=" + fmt(k.ky) + ")";
}

// Six-component source of the initial fields for one direction.
synthesis::BlockSource pulse_source(const RunConfig& cfg, const LaplacePoint& p, Direction d) {
    const InitialPulse pulse = cfg.pulse;
    const UnitSystem units = cfg.units;
    return [pulse, units, p, d](double z) {
        const double x = (z - pulse.center) / pulse.width;
        const double g = std::exp(-0.5 * x * x);
        return em::source_vector({}, pulse.b * g, pulse.d * g, p.s, d, units);
    };
}

std::vector<KParallel> kpar_values(const RunConfig& cfg, double omega) {
    if (!cfg.sweep.kpar.empty()) return cfg.sweep.kpar;
    std::vector<KParallel> out;
    const double k0 = omega / cfg.units.c();
    const double phi = cfg.sweep.azimuth_deg * std::numbers::pi / 180.0;
    for (double a : cfg.sweep.angles_deg) {
        const double th = a * std::numbers::pi / 180.0;
        out.push_back({k0 * std::sin(th) * std::cos(phi), k0 * std::sin(th) * std::sin(phi)});
    }
    return out;
}

std::optional<Failure> run_scattering(const RunConfig& cfg, int threads, Table& table) {
    table.columns = {"omega", "kx", "ky"};
    for (const char* m : {"r", "t"})
        for (const char* ab : {"ss", "sp", "ps", "pp"}) {
            table.columns.push_back(std::string("re_") + m + "_" + ab);
            table.columns.push_back(std::string("im_") + m + "_" + ab);
        }
    for (const char* c : {"R_s", "R_p", "T_s", "T_p"}) table.columns.push_back(c);

    struct Point {
        double omega;
        KParallel k;
    };
    std::vector<Point> points;
    for (double w : linspace(cfg.sweep.omega_min, cfg.sweep.omega_max, cfg.sweep.omega_count))
        for (const auto& k : kpar_values(cfg, w)) points.push_back({w, k});
    std::vector<std::string> rows(points.size());
    auto fail = parallel_for(
        points.size(), threads,
        [&](std::size_t i) {
            const auto r = stack::scattering_matrices(cfg.stack, points[i].k, points[i].omega, cfg.units);
            std::string row;
            append(row, points[i].omega);
            append(row, points[i].k.kx);
            append(row, points[i].k.ky);
            for (const em::Mat2* m : {&r.r, &r.t}) {
                // ab = outgoing a, incident b
                append(row, (*m)(0, 0));
                append(row, (*m)(0, 1));
                append(row, (*m)(1, 0));
                append(row, (*m)(1, 1));
            }
            append(row, r.reflectance[0]);
            append(row, r.reflectance[1]);
            append(row, r.transmittance[0]);
            append(row, r.transmittance[1]);
            rows[i] = std::move(row);
        },
        [&](std::size_t i) { return point_label(points[i].omega, points[i].k); });
    table.rows = std::move(rows);
    return fail;
}

std::optional<Failure> run_initial_value(const RunConfig& cfg, int threads, Table& table) {
    table.columns = {"omega", "kx", "ky", "direction", "z"};
    for (auto& c : field_columns()) table.columns.push_back(c);
    struct Point {
        double omega;
        KParallel k;
        Direction d;
    };
    std::vector<Point> points;
    for (double w : linspace(cfg.sweep.omega_min, cfg.sweep.omega_max, cfg.sweep.omega_count))
        for (const auto& k : kpar_values(cfg, w))
            for (Direction d : {Direction::forward, Direction::backward}) points.push_back({w, k, d});
    const auto zs = linspace(cfg.zgrid.min, cfg.zgrid.max, cfg.zgrid.count);
    std::vector<std::string> blocks(points.size());
    auto fail = parallel_for(
        points.size(), threads,
        [&](std::size_t i) {
            const Point& p = points[i];
            const auto lp = LaplacePoint::harmonic(p.omega, p.d);
            const auto frame = synthesis::driven_profile(cfg.stack, p.k, lp, p.d, cfg.units, pulse_source(cfg, lp, p.d), zs);
            std::string block;
            for (std::size_t n = 0; n < zs.size(); ++n) {
                std::string row;
                append(row, p.omega);
                append(row, p.k.kx);
                append(row, p.k.ky);
                append(row, std::string(to_string(p.d)));
                append(row, zs[n]);
                for (int c = 0; c < 3; ++c) append(row, frame.e[n](c));
                for (int c = 0; c < 3; ++c) append(row, frame.h[n](c));
                if (n) block += '\n';
                block += row;
            }
            blocks[i] = std::move(block);
        },
        [&](std::size_t i) {
            return point_label(points[i].omega, points[i].k) + " " + to_string(points[i].d);
        });
    table.rows = std::move(blocks);
    return fail;
}

std::optional<Failure> run_time(const RunConfig& cfg, int threads, Table& table) {
    table.columns = {"kx", "ky", "z", "t"};
    for (auto& c : field_columns()) table.columns.push_back(c);
    const auto omegas = synthesis::symmetric_grid(cfg.time.d_omega, cfg.time.count);
    const auto& ks = cfg.sweep.kpar;
    const std::size_t nw = omegas.size();
    // One task per (k∥, ω, direction); spectra at every probe.
    const std::size_t n = ks.size() * nw * 2;
    std::vector<std::vector<Vec6>> spectra(n);
    auto decode = [&](std::size_t i, std::size_t& ik, std::size_t& iw, Direction& d) {
        ik = i / (2 * nw);
        iw = (i / 2) % nw;
        d = i % 2 == 0 ? Direction::forward : Direction::backward;
    };
    auto fail = parallel_for(
        n, threads,
        [&](std::size_t i) {
            std::size_t ik, iw;
            Direction d;
            decode(i, ik, iw, d);
            const auto lp = LaplacePoint::harmonic(omegas[iw], d);
            const auto frame = synthesis::driven_profile(cfg.stack, ks[ik], lp, d, cfg.units,
                                                         pulse_source(cfg, lp, d), cfg.time.probes);
            std::vector<Vec6> out;
            for (std::size_t p = 0; p < frame.axis.size(); ++p) {
                Vec6 v;
                v << frame.e[p], frame.h[p];
                out.push_back(v);
            }
            spectra[i] = std::move(out);
        },
        [&](std::size_t i) {
            std::size_t ik, iw;
            Direction d;
            decode(i, ik, iw, d);
            return point_label(omegas[iw], ks[ik]) + " " + to_string(d);
        });
    if (fail) return fail;

    const auto times = linspace(cfg.time.t_min, cfg.time.t_max, cfg.time.t_count);
    synthesis::TimeOptions opt;
    opt.raised_cosine = cfg.time.raised_cosine;
    opt.edge_tolerance = cfg.tolerances.spectrum_edge;
    for (std::size_t ik = 0; ik < ks.size(); ++ik) {
        for (std::size_t p = 0; p < cfg.time.probes.size(); ++p) {
            std::vector<Vec6> f(nw), b(nw);
            for (std::size_t iw = 0; iw < nw; ++iw) {
                f[iw] = spectra[(ik * nw + iw) * 2][p];
                b[iw] = spectra[(ik * nw + iw) * 2 + 1][p];
            }
            synthesis::FieldFrame frame;
            try {
                frame = synthesis::time_reconstruct(omegas, f, b, ks[ik], Eigen::Vector2d::Zero(), times, opt);
            } catch (const std::exception& e) {
                return Failure{0, "time reconstruction at (kx=" + fmt(ks[ik].kx) + ", ky=" + fmt(ks[ik].ky) +
                                      ", z=" + fmt(cfg.time.probes[p]) + "): " + e.what()};
            }
            for (std::size_t t = 0; t < times.size(); ++t) {
                std::string row;
                append(row, ks[ik].kx);
                append(row, ks[ik].ky);
                append(row, cfg.time.probes[p]);
                append(row, times[t]);
                for (int c = 0; c < 3; ++c) append(row, frame.e[t](c));
                for (int c = 0; c < 3; ++c) append(row, frame.h[t](c));
                table.rows.push_back(std::move(row));
            }
        }
    }
    return std::nullopt;
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void write_outputs(const RunConfig& cfg, const Table& table, std::ostream& err) {
    const fs::path dir(cfg.output.directory);
    fs::create_directories(dir);
    const fs::path csv = dir / (cfg.output.stem + ".csv");
    {
        std::ofstream out(csv, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + csv.string());
        for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
        out << '\n';
        for (const auto& r : table.rows) out << r << '\n';
    }
    std::size_t rows = 0;
    for (const auto& r : table.rows) rows += 1 + std::size_t(std::count(r.begin(), r.end(), '\n'));
    if (cfg.output.json) {
        nlohmann::ordered_json j;
        j["config_file"] = fs::path(cfg.path).filename().string();
        j["config_hash"] = "fnv1a64:" + hex64(fnv1a(cfg.text));
        j["mode"] = to_string(cfg.mode);
        j["units"] = {{"name", cfg.unit_name}, {"eps0", cfg.units.eps0}, {"mu0", cfg.units.mu0}};
        j["seed"] = cfg.seed;
        j["tolerances"] = {{"spectrum_edge", cfg.tolerances.spectrum_edge},
                           {"eigenvector_condition_max", 1e12},
                           {"matching_rcond_min", 1e-13},
                           {"kernel_quadrature_relative", 1e-10},
                           {"kz_edge_relative", 1e-8}};
        j["columns"] = table.columns;
        j["rows"] = rows;
        std::ofstream out(dir / (cfg.output.stem + ".json"), std::ios::binary);
        out << j.dump(2) << '\n';
    }
    err << "wrote " << rows << " rows to " << csv.string() << '\n';
}

}  // namespace

int run(const std::string& config_path, const RunOptions& options, std::ostream& err) {
    LoadResult loaded;
    try {
        loaded = load_config(config_path, options.overrides);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\ninvalid-config\n";
        return exit_invalid_config;
    }
    for (const auto& d : loaded.diagnostics) err << d.str(config_path) << '\n';
    if (!loaded.config) {
        err << "invalid-config\n";
        return exit_invalid_config;
    }
    if (options.validate_only) {
        err << "config ok\n";
        return exit_ok;
    }
    const RunConfig& cfg = *loaded.config;
    Table table;
    std::optional<Failure> fail;
    switch (cfg.mode) {
        case RunMode::scattering:
            fail = run_scattering(cfg, options.threads, table);
            break;
        case RunMode::initial_value:
            fail = run_initial_value(cfg, options.threads, table);
            break;
        case RunMode::time_reconstruction:
            fail = run_time(cfg, options.threads, table);
            break;
    }
    if (fail) {
        err << "numerical-failure " << fail->message << '\n';
        return exit_numerical_failure;
    }
    try {
        write_outputs(cfg, table, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_numerical_failure;
    }
    return exit_ok;
}

}  // namespace bianiso::cli
