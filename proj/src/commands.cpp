// Copyright 2026 The Omegance Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "omegance/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "omegance/analysis.hpp"
#include "omegance/error.hpp"
#include "omegance/experiment.hpp"
#include "omegance/fft.hpp"
#include "omegance/io.hpp"
#include "omegance/parallel.hpp"

#ifndef OMEGANCE_VERSION
#define OMEGANCE_VERSION "dev"
#endif

namespace omegance {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Artifact {
    std::string name;
    std::string sha256;
    std::uintmax_t bytes = 0;
};

// Bookkeeping for one command invocation; the manifest is written last.
class Run {
public:
    explicit Run(std::string command) : m_command(std::move(command)) {}

    void set_out_dir(std::filesystem::path dir) {
        m_out_dir = std::move(dir);
        std::filesystem::create_directories(m_out_dir);
    }
    const std::filesystem::path& out_dir() const { return m_out_dir; }
    bool has_out_dir() const { return !m_out_dir.empty(); }

    std::ofstream open(const std::string& name) const {
        std::ofstream out(m_out_dir / name, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot write " + (m_out_dir / name).string());
        }
        out.precision(17);
        return out;
    }

    void add_artifact(const std::string& name) {
        const auto path = m_out_dir / name;
        m_artifacts.push_back({name, sha256_file(path), std::filesystem::file_size(path)});
    }

    json& config() { return m_config; }
    json& timings() { return m_timings; }
    json& details() { return m_details; }

    void write_manifest(const std::string& status, const json& error = nullptr) {
        if (!has_out_dir()) {
            return;
        }
        std::sort(m_artifacts.begin(), m_artifacts.end(),
                  [](const Artifact& a, const Artifact& b) { return a.name < b.name; });
        json manifest;
        manifest["command"] = m_command;
        manifest["status"] = status;
        if (!error.is_null()) {
            manifest["error"] = error;
        }
        manifest["config"] = m_config;
        json artifacts = json::array();
        for (const auto& a : m_artifacts) {
            artifacts.push_back({{"path", a.name}, {"sha256", a.sha256}, {"bytes", a.bytes}});
        }
        manifest["artifacts"] = artifacts;
        if (!m_details.is_null()) {
            manifest["results"] = m_details;
        }
        manifest["versions"] = {{"omegance", OMEGANCE_VERSION},
                                {"compiler", __VERSION__},
                                {"fftw", fft_backend_version()},
                                {"openssl", digest_backend_version()}};
        m_timings["total_seconds"] = seconds_since(m_start);
        manifest["timings"] = m_timings;
        std::ofstream out(m_out_dir / "manifest.json", std::ios::binary | std::ios::trunc);
        out << manifest.dump(2) << '\n';
    }

private:
    std::string m_command;
    std::filesystem::path m_out_dir;
    std::vector<Artifact> m_artifacts;
    json m_config;
    json m_timings = json::object();
    json m_details;
    Clock::time_point m_start = Clock::now();
};

int report_failure(Run& run, std::ostream& log, int code, const std::string& status, const std::string& message,
                   json error = json::object()) {
    log << "error: " << message << '\n';
    error["message"] = message;
    try {
        run.write_manifest(status, error);
    } catch (const std::exception& e) {
        log << "error: cannot write manifest: " << e.what() << '\n';
    }
    return code;
}

// Loads the config, applies overrides and maps exceptions to exit codes.
template <class Body>
int execute(const std::string& command, const std::filesystem::path& config_path, const RunOptions& options,
            std::ostream& log, Body&& body) {
    Run run(command);
    try {
        if (options.out_dir) {
            run.set_out_dir(*options.out_dir);
        }
        ExperimentConfig config = load_experiment_config(config_path);
        if (options.seeds) {
            if (options.seeds->empty()) {
                throw ConfigError("--seeds: at least one seed is required");
            }
            config.seeds = *options.seeds;
        }
        if (options.out_dir) {
            config.output_dir = *options.out_dir;
        } else {
            run.set_out_dir(config.output_dir);
        }
        run.config() = config.to_json();
        const std::size_t threads = resolve_threads(options, config.threads);
        body(config, threads, run);
        run.write_manifest("ok");
        log << command << ": wrote " << run.out_dir().string() << '\n';
        return kExitOk;
    } catch (const ConfigError& e) {
        return report_failure(run, log, kExitConfigError, "config_error", e.what());
    } catch (const NumericAbort& e) {
        json error = run.details().is_object() && run.details().contains("abort") ? run.details()["abort"]
                                                                                   : json::object();
        error["step"] = e.step();
        return report_failure(run, log, kExitNumericAbort, "numeric_abort", e.what(), error);
    } catch (const std::exception& e) {
        return report_failure(run, log, kExitFailure, "failed", e.what());
    }
}

void require_uniform_omega(const ExperimentConfig& config, const std::string& command) {
    if (config.omega.mask || config.omega.schedule) {
        throw ConfigError(command + " sweeps uniform omega values; remove omega.mask and omega.schedule");
    }
}

std::string cell_name(std::uint64_t seed, std::size_t omega_index, SnapshotFormat format) {
    return "traj_seed" + std::to_string(seed) + "_omega" + std::to_string(omega_index) +
           (format == SnapshotFormat::kCsv ? ".csv" : ".bin");
}

std::vector<double> sorted_unique(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    return values;
}

double relative_deviation(double reference, double value) {
    const bool ref_inf = std::isinf(reference);
    const bool val_inf = std::isinf(value);
    if (ref_inf || val_inf) {
        return ref_inf && val_inf ? 0.0 : std::numeric_limits<double>::infinity();
    }
    if (reference == value) {
        return 0.0;
    }
    return std::abs(value - reference) / std::abs(reference);
}

double forward_snr(const AlphaBarSchedule& schedule, std::size_t t) {
    try {
        return snr(schedule, t);
    } catch (const SignalDivergence&) {
        return std::numeric_limits<double>::infinity();
    }
}

// Min-max normalised 8-bit rendering; a constant grid renders mid-grey.
GrayImage render_grid(const Latent& grid) {
    GrayImage image{grid.rows(), grid.cols(), std::vector<std::uint8_t>(grid.size(), 128)};
    const auto [lo, hi] = std::minmax_element(grid.values().begin(), grid.values().end());
    if (*hi > *lo) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            image.pixels[i] = static_cast<std::uint8_t>(std::lround(255.0 * (grid[i] - *lo) / (*hi - *lo)));
        }
    }
    return image;
}

}  // namespace

std::size_t resolve_threads(const RunOptions& options, std::optional<std::size_t> config_threads) {
    if (options.threads && *options.threads > 0) {
        return *options.threads;
    }
    if (const char* env = std::getenv("OMEGANCE_THREADS")) {
        char* end = nullptr;
        const unsigned long value = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && value > 0) {
            return value;
        }
    }
    if (config_threads && *config_threads > 0) {
        return *config_threads;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

int cmd_sample(const std::filesystem::path& config_path, const RunOptions& options, std::ostream& log) {
    return execute("sample", config_path, options, log, [&](const ExperimentConfig& config, std::size_t threads,
                                                            Run& run) {
        const auto denoiser = make_denoiser(config);
        const auto omegas = config.omega.sweep();
        std::vector<std::size_t> snapshot_steps = config.snapshot_steps;
        snapshot_steps.push_back(config.steps);
        std::sort(snapshot_steps.begin(), snapshot_steps.end());
        snapshot_steps.erase(std::unique(snapshot_steps.begin(), snapshot_steps.end()), snapshot_steps.end());

        const std::size_t cells = config.seeds.size() * omegas.size();
        std::vector<std::string> names(cells);
        std::vector<double> cell_seconds(cells, 0.0);
        std::vector<std::optional<NumericAbort>> aborts(cells);
        parallel_for(cells, threads, [&](std::size_t cell) {
            const auto start = Clock::now();
            const std::uint64_t seed = config.seeds[cell / omegas.size()];
            const std::size_t o = cell % omegas.size();
            SamplerConfig sampler = make_sampler_config(config, omegas[o], seed);
            sampler.snapshot_steps = snapshot_steps;
            const Latent z_init = initial_latent(sampler, config.height, config.width, seed);
            Trajectory trajectory;
            try {
                trajectory = run_sampler(*denoiser, sampler, z_init);
            } catch (const NumericAbort& e) {
                aborts[cell] = e;
                return;
            }
            names[cell] = cell_name(seed, o, config.snapshot_format);
            auto out = run.open(names[cell]);
            if (config.snapshot_format == SnapshotFormat::kCsv) {
                write_snapshots_csv(out, trajectory.snapshots);
            } else {
                for (const auto& state : trajectory.snapshots) {
                    write_snapshot_binary(out, state);
                }
            }
            cell_seconds[cell] = seconds_since(start);
        });

        json cells_json = json::array();
        for (std::size_t cell = 0; cell < cells; ++cell) {
            if (!names[cell].empty()) {
                run.add_artifact(names[cell]);
            }
            cells_json.push_back({{"seed", config.seeds[cell / omegas.size()]},
                                  {"omega_index", cell % omegas.size()},
                                  {"omega", omegas[cell % omegas.size()]},
                                  {"seconds", cell_seconds[cell]}});
        }
        run.timings()["cells"] = cells_json;
        for (std::size_t cell = 0; cell < cells; ++cell) {
            if (aborts[cell]) {
                run.details() = {{"abort",
                                  {{"seed", config.seeds[cell / omegas.size()]},
                                   {"omega_index", cell % omegas.size()},
                                   {"omega", omegas[cell % omegas.size()]}}}};
                throw *aborts[cell];
            }
        }
        log << "sample: " << cells << " trajectories\n";
    });
}

int cmd_snr(const std::filesystem::path& config_path, const RunOptions& options, std::ostream& log) {
    return execute("snr", config_path, options, log, [&](const ExperimentConfig& config, std::size_t, Run& run) {
        if (config.sampler != SamplerKind::kDdim) {
            throw ConfigError("snr needs the ddim sampler");
        }
        require_uniform_omega(config, "snr");
        const auto schedule = std::get<AlphaBarSchedule>(make_schedule(config));
        const auto omegas = config.omega.sweep();

        std::vector<SnrTrajectory> analytic;
        auto out = run.open("snr.csv");
        out << "omega,t,alpha_bar,snr_forward,snr_analytic,snr_propagated,rel_deviation\n";
        auto summary = run.open("snr_summary.csv");
        summary << "omega,points,max_rel_deviation\n";
        json results = json::array();
        for (double omega : omegas) {
            const auto a = snr_trajectory(schedule, omega, SnrMode::kAnalytic);
            const auto p = snr_trajectory(schedule, omega, SnrMode::kPropagated);
            double max_dev = 0.0;
            for (std::size_t k = 0; k < a.points.size(); ++k) {
                const std::size_t t = a.points[k].t;
                const double dev = relative_deviation(a.points[k].snr, p.points[k].snr);
                max_dev = std::max(max_dev, dev);
                out << format_double(omega) << ',' << t << ',' << format_double(schedule[t]) << ','
                    << format_double(forward_snr(schedule, t)) << ',' << format_double(a.points[k].snr) << ','
                    << format_double(p.points[k].snr) << ',' << format_double(dev) << '\n';
            }
            summary << format_double(omega) << ',' << a.points.size() << ',' << format_double(max_dev) << '\n';
            results.push_back({{"omega", omega}, {"max_rel_deviation", max_dev}});
            analytic.push_back(a);
        }
        out.close();
        summary.close();
        run.add_artifact("snr.csv");
        run.add_artifact("snr_summary.csv");

        // Ordering across omega, excluding the final step onto pure signal
        // (ᾱ = 1), where the modified SNR is symmetric about omega = 1.
        std::vector<std::size_t> order(omegas.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            order[i] = i;
        }
        std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return omegas[x] < omegas[y]; });
        auto ordering = run.open("snr_ordering.csv");
        ordering << "omega_low,omega_high,points_compared,status\n";
        for (std::size_t i = 1; i < order.size(); ++i) {
            const auto& lo = analytic[order[i - 1]];
            const auto& hi = analytic[order[i]];
            if (lo.omega == hi.omega) {
                continue;
            }
            std::size_t compared = 0;
            bool ordered = true;
            for (std::size_t k = 0; k < lo.points.size(); ++k) {
                if (schedule[lo.points[k].t] >= 1.0) {
                    continue;
                }
                ++compared;
                ordered = ordered && lo.points[k].snr < hi.points[k].snr;
            }
            ordering << format_double(lo.omega) << ',' << format_double(hi.omega) << ',' << compared << ','
                     << (ordered ? "pass" : "fail") << '\n';
        }
        ordering.close();
        run.add_artifact("snr_ordering.csv");
        run.details() = results;
        log << "snr: " << omegas.size() << " omega values over " << schedule.steps() << " steps\n";
    });
}

int cmd_spectrum(const std::filesystem::path& config_path, const RunOptions& options, std::ostream& log) {
    return execute("spectrum", config_path, options, log, [&](const ExperimentConfig& config, std::size_t threads,
                                                              Run& run) {
        require_uniform_omega(config, "spectrum");
        if (config.height < 4 || config.width < 4) {
            throw ConfigError("spectrum needs a 2-D latent of at least 4x4");
        }
        const auto denoiser = make_denoiser(config);
        const auto omegas = sorted_unique(config.omega.sweep());
        SamplerConfig base = make_sampler_config(config, 1.0, 0);
        const SpectrumStudy study = spectrum_study(*denoiser, base, omegas, config.seeds, config.height,
                                                   config.width, threads, config.band_split);

        auto spectrum = run.open("spectrum.csv");
        spectrum << "omega,step,bin,count,mean_power\n";
        auto bands = run.open("band_energy.csv");
        bands << "omega,step,low,high\n";
        for (std::size_t o = 0; o < omegas.size(); ++o) {
            for (std::size_t s = 0; s < study.steps.size(); ++s) {
                const auto& profile = study.profiles[o][s];
                for (std::size_t b = 0; b < profile.bins(); ++b) {
                    spectrum << format_double(omegas[o]) << ',' << study.steps[s] << ',' << b << ','
                             << profile.counts[b] << ',' << format_double(profile.mean_power[b]) << '\n';
                }
                bands << format_double(omegas[o]) << ',' << study.steps[s] << ','
                      << format_double(study.low_energy[o][s]) << ',' << format_double(study.high_energy[o][s])
                      << '\n';
            }
        }
        spectrum.close();
        bands.close();
        run.add_artifact("spectrum.csv");
        run.add_artifact("band_energy.csv");

        const std::size_t last = study.steps.size() - 1;
        const bool ordered = study.high_band_ordered(last);
        auto ordering = run.open("ordering.csv");
        ordering << "check,omega,step,status\n";
        ordering << "high_band_ordered,all," << study.steps[last] << ',' << (ordered ? "pass" : "fail") << '\n';
        json decays = json::array();
        for (std::size_t o = 0; o < omegas.size(); ++o) {
            const bool decays_ok = study.high_band_decays(o, 0.8);
            ordering << "high_band_decay," << format_double(omegas[o]) << ",last_80_percent,"
                     << (decays_ok ? "pass" : "fail") << '\n';
            decays.push_back({{"omega", omegas[o]}, {"decays", decays_ok}});
        }
        ordering.close();
        run.add_artifact("ordering.csv");
        run.details() = {{"high_band_ordered", ordered}, {"high_band_decay", decays}};
        log << "spectrum: final high-band ordering " << (ordered ? "pass" : "fail") << '\n';
    });
}

int cmd_preview(const PreviewRequest& request, std::ostream& log) {
    Run run("preview");
    try {
        run.set_out_dir(request.out_dir);
        if (request.kind == PreviewKind::kMask) {
            OmegaMask mask = OmegaMask::uniform(1, 1, 1.0);
            if (request.config_path) {
                ExperimentConfig config = load_experiment_config(*request.config_path);
                run.config() = config.to_json();
                if (!config.omega.mask) {
                    throw ConfigError("config has no omega.mask to preview");
                }
                mask = *make_omega_control(config, 1.0).mask();
            } else {
                const GrayImage image = read_pgm(request.mask_path);
                mask = mask_from_grayscale(image, request.factor, request.omega_lo, request.omega_hi,
                                           request.pooling);
                run.config() = {{"kind", "mask"},
                                {"mask", request.mask_path.filename().string()},
                                {"factor", request.factor},
                                {"omega_lo", request.omega_lo},
                                {"omega_hi", request.omega_hi},
                                {"pooling", request.pooling == Pooling::kAverage ? "average" : "nearest"}};
            }
            {
                auto csv = run.open("mask_omega.csv");
                write_grid_csv(csv, mask.grid());
            }
            write_pgm(run.out_dir() / "mask_omega.pgm", render_grid(mask.grid()));
            run.add_artifact("mask_omega.csv");
            run.add_artifact("mask_omega.pgm");
            log << "preview: mask " << mask.rows() << "x" << mask.cols() << '\n';
        } else {
            std::optional<OmegaSchedule> schedule;
            if (request.config_path) {
                ExperimentConfig config = load_experiment_config(*request.config_path);
                run.config() = config.to_json();
                if (!config.omega.schedule) {
                    throw ConfigError("config has no omega.schedule to preview");
                }
                schedule = make_omega_control(config, 1.0).schedule();
            } else {
                static const std::set<std::string> kinds = {"constant", "two_stage", "exp", "cos"};
                schedule = kinds.contains(request.schedule)
                               ? OmegaSchedule(request.schedule_kind, request.steps)
                               : OmegaSchedule::preset(request.schedule, request.steps);
                run.config() = {{"kind", "schedule"}, {"schedule", request.schedule}, {"steps", request.steps}};
            }
            {
                auto csv = run.open("schedule_omega.csv");
                write_schedule_preview_csv(csv, *schedule);
            }
            run.add_artifact("schedule_omega.csv");
            log << "preview: schedule over " << schedule->total_steps() << " steps\n";
        }
        run.write_manifest("ok");
        return kExitOk;
    } catch (const NumericAbort& e) {
        return report_failure(run, log, kExitNumericAbort, "numeric_abort", e.what(), {{"step", e.step()}});
    } catch (const Error& e) {
        // Preview inputs are user data: bad PGM headers and bounds count as config errors.
        return report_failure(run, log, kExitConfigError, "config_error", e.what());
    } catch (const std::exception& e) {
        return report_failure(run, log, kExitFailure, "failed", e.what());
    }
}

}  // namespace omegance
