// Copyright 2026 The Omegance Lab Authors
// SPDX-License-Identifier: Apache-2.0

// omegance: config-driven runner for omega-scaled reverse diffusion experiments.

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "omegance/commands.hpp"

namespace {

struct CommonFlags {
    std::string config;
    std::string out;
    std::vector<std::uint64_t> seeds;
    std::size_t threads = 0;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", flags.out, "Output directory (overrides output_dir)");
    cmd->add_option("--seeds", flags.seeds, "Comma-separated seed list (overrides seeds)")->delimiter(',');
    cmd->add_option("--threads", flags.threads, "Worker threads (fallback: OMEGANCE_THREADS)");
}

omegance::RunOptions to_options(const CommonFlags& flags) {
    omegance::RunOptions options;
    if (!flags.out.empty()) {
        options.out_dir = flags.out;
    }
    if (!flags.seeds.empty()) {
        options.seeds = flags.seeds;
    }
    if (flags.threads > 0) {
        options.threads = flags.threads;
    }
    return options;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"omega-scaled reverse diffusion experiments against closed-form oracles"};
    app.require_subcommand(1);

    CommonFlags sample_flags;
    CommonFlags snr_flags;
    CommonFlags spectrum_flags;
    add_common(app.add_subcommand("sample", "Run trajectories for every (seed, omega) cell"), sample_flags);
    add_common(app.add_subcommand("snr", "Analytic vs propagated modified SNR"), snr_flags);
    add_common(app.add_subcommand("spectrum", "Seed-averaged radial spectra over an omega sweep"), spectrum_flags);

    auto* preview = app.add_subcommand("preview", "Resolve a mask or schedule to CSV");
    omegance::PreviewRequest request;
    std::string kind;
    std::string config;
    std::string out = "preview";
    std::string mask;
    std::string pooling = "average";
    std::size_t tau = 10;
    double omega_in = 1.0;
    double omega_out = 1.0;
    double constant = 1.0;
    double amplitude = 0.0;
    double rate = 1.0;
    double offset = 0.0;
    preview->add_option("kind", kind, "mask or schedule")->required()->check(CLI::IsMember({"mask", "schedule"}));
    preview->add_option("--config", config, "Take the mask or schedule from a config")->check(CLI::ExistingFile);
    preview->add_option("--out", out, "Output directory");
    preview->add_option("--mask", mask, "Binary PGM mask")->check(CLI::ExistingFile);
    preview->add_option("--factor", request.factor, "Downsampling factor");
    preview->add_option("--omega-lo", request.omega_lo, "omega at intensity 0");
    preview->add_option("--omega-hi", request.omega_hi, "omega at intensity 255");
    preview->add_option("--pooling", pooling, "average or nearest")->check(CLI::IsMember({"average", "nearest"}));
    preview->add_option("--schedule", request.schedule, "Preset (EXP1, EXP2, COS1, COS2) or kind");
    preview->add_option("--steps", request.steps, "Reverse steps T");
    preview->add_option("--tau", tau, "two_stage switch step");
    preview->add_option("--omega-in", omega_in, "two_stage omega before tau");
    preview->add_option("--omega-out", omega_out, "two_stage omega from tau on");
    preview->add_option("--omega", constant, "constant omega");
    preview->add_option("--A", amplitude, "exp/cos amplitude");
    preview->add_option("--lambda", rate, "exp rate");
    preview->add_option("--B", offset, "exp/cos offset");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Usage errors share the config-error exit code.
        return app.exit(e) == 0 ? omegance::kExitOk : omegance::kExitConfigError;
    }

    try {
        if (app.got_subcommand("sample")) {
            return omegance::cmd_sample(sample_flags.config, to_options(sample_flags), std::cerr);
        }
        if (app.got_subcommand("snr")) {
            return omegance::cmd_snr(snr_flags.config, to_options(snr_flags), std::cerr);
        }
        if (app.got_subcommand("spectrum")) {
            return omegance::cmd_spectrum(spectrum_flags.config, to_options(spectrum_flags), std::cerr);
        }
        request.kind = kind == "mask" ? omegance::PreviewKind::kMask : omegance::PreviewKind::kSchedule;
        if (!config.empty()) {
            request.config_path = config;
        }
        request.out_dir = out;
        request.mask_path = mask;
        request.pooling = pooling == "nearest" ? omegance::Pooling::kNearest : omegance::Pooling::kAverage;
        if (request.kind == omegance::PreviewKind::kMask && config.empty() && mask.empty()) {
            std::cerr << "error: preview mask needs --mask or --config\n";
            return omegance::kExitConfigError;
        }
        const std::map<std::string, omegance::ScheduleKind> kinds = {
            {"constant", omegance::ConstantSchedule{constant}},
            {"two_stage", omegance::TwoStageSchedule{tau, omega_in, omega_out}},
            {"exp", omegance::ExpSchedule{amplitude, rate, offset}},
            {"cos", omegance::CosSchedule{amplitude, offset}},
        };
        if (const auto it = kinds.find(request.schedule); it != kinds.end()) {
            request.schedule_kind = it->second;
        }
        return omegance::cmd_preview(request, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return omegance::kExitFailure;
    }
}
