// Copyright 2026 The Omegance Lab Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "omegance/analysis.hpp"
#include "omegance/commands.hpp"
#include "omegance/error.hpp"
#include "omegance/experiment.hpp"
#include "omegance/io.hpp"
#include "omegance/oracle_denoisers.hpp"
#include "reference.hpp"
#include "support.hpp"

using namespace omegance;
using nlohmann::json;
using omegance::test::read_file;
using omegance::test::TempDir;
using omegance::test::write_file;

namespace {

json base_config() {
    return {{"sampler", "ddim"},
            {"schedule", {{"T", 1000}}},
            {"steps", 20},
            {"omega", {{"omega", {1.0}}}},
            {"oracle", {{"kind", "mixture"}, {"weights", {0.4, 0.6}}, {"means", {-1.0, 1.5}}, {"variances", {0.3, 0.5}}}},
            {"latent", {{"height", 4}, {"width", 4}}},
            {"seeds", {5}},
            {"snapshot_steps", {0, 5, 10}}};
}

std::filesystem::path put_config(const TempDir& dir, const json& config, const std::string& name = "config.json") {
    const auto path = dir.path() / name;
    write_file(path, config.dump(2));
    return path;
}

json read_json(const std::filesystem::path& path) { return json::parse(read_file(path)); }

std::set<std::string> listing(const std::filesystem::path& dir) {
    std::set<std::string> names;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        names.insert(entry.path().filename().string());
    }
    return names;
}

int sample(const std::filesystem::path& config, const std::filesystem::path& out, RunOptions options = {}) {
    options.out_dir = out;
    options.threads = options.threads.value_or(1);
    std::ostringstream log;
    return cmd_sample(config, options, log);
}

void write_pgm_file(const std::filesystem::path& path, std::size_t h, std::size_t w, std::uint8_t value) {
    write_pgm(path, GrayImage{h, w, std::vector<std::uint8_t>(h * w, value)});
}

}  // namespace

TEST_CASE("config parsing rejects bad documents") {
    TempDir dir("cfg");
    CHECK_NOTHROW(parse_experiment_config(base_config(), dir.path()));

    json typo = base_config();
    typo["omgea"] = 1.0;
    CHECK_THROWS_AS(parse_experiment_config(typo, dir.path()), ConfigError);

    json nested = base_config();
    nested["schedule"]["betta_end"] = 0.02;
    CHECK_THROWS_AS(parse_experiment_config(nested, dir.path()), ConfigError);

    json both = base_config();
    both["omega"]["varpi"] = {0.0};
    CHECK_THROWS_AS(parse_experiment_config(both, dir.path()), ConfigError);

    json sampler = base_config();
    sampler["sampler"] = "heun";
    CHECK_THROWS_AS(parse_experiment_config(sampler, dir.path()), ConfigError);

    json negative = base_config();
    negative["omega"]["omega"] = {-1.0};
    CHECK_THROWS_AS(parse_experiment_config(negative, dir.path()), ConfigError);

    json missing_mask = base_config();
    missing_mask["omega"]["mask"] = {{"path", "absent.pgm"}};
    CHECK_THROWS_AS(parse_experiment_config(missing_mask, dir.path()), ConfigError);

    write_pgm_file(dir.path() / "wrong.pgm", 8, 8, 255);
    json wrong_dims = base_config();
    wrong_dims["omega"]["mask"] = {{"path", "wrong.pgm"}};
    CHECK_THROWS_AS(parse_experiment_config(wrong_dims, dir.path()), ConfigError);
    wrong_dims["omega"]["mask"]["factor"] = 2;
    CHECK_NOTHROW(parse_experiment_config(wrong_dims, dir.path()));

    json bad_mix = base_config();
    bad_mix["oracle"]["weights"] = {0.5, 0.6};
    CHECK_THROWS_AS(parse_experiment_config(bad_mix, dir.path()), ConfigError);

    json bad_type = base_config();
    bad_type["steps"] = "twenty";
    CHECK_THROWS_AS(parse_experiment_config(bad_type, dir.path()), ConfigError);
}

TEST_CASE("varpi goes through the rescale") {
    TempDir dir("varpi");
    json config = base_config();
    config["omega"] = {{"varpi", {0.0, 2.0}}};
    const auto parsed = parse_experiment_config(config, dir.path());
    const auto sweep = parsed.omega.sweep();
    REQUIRE(sweep.size() == 2);
    CHECK(sweep[0] == 1.0);
    CHECK(sweep[1] == rescale(2.0).value());
    CHECK(parsed.to_json()["omega"]["resolved_omega"][1] == sweep[1]);
}

TEST_CASE("sample writes one trajectory per seed and omega plus a manifest") {
    TempDir dir("sample");
    json config = base_config();
    config["omega"]["omega"] = {0.9, 1.1};
    config["seeds"] = {1, 2};
    const auto path = put_config(dir, config);
    REQUIRE(sample(path, dir.path() / "out") == kExitOk);
    const auto names = listing(dir.path() / "out");
    CHECK(names == std::set<std::string>{"manifest.json", "traj_seed1_omega0.csv", "traj_seed1_omega1.csv",
                                         "traj_seed2_omega0.csv", "traj_seed2_omega1.csv"});
    const json manifest = read_json(dir.path() / "out" / "manifest.json");
    CHECK(manifest["status"] == "ok");
    CHECK(manifest["command"] == "sample");
    CHECK(manifest["artifacts"].size() == 4);
    for (const auto& artifact : manifest["artifacts"]) {
        CHECK(artifact["sha256"] == sha256_file(dir.path() / "out" / artifact["path"].get<std::string>()));
    }
    CHECK(manifest["versions"].contains("omegance"));
    CHECK(manifest["timings"].contains("total_seconds"));
    CHECK(manifest["config"]["omega"]["resolved_omega"] == json({0.9, 1.1}));

    // --seeds overrides the config list.
    RunOptions options;
    options.seeds = std::vector<std::uint64_t>{7};
    REQUIRE(sample(path, dir.path() / "out7", options) == kExitOk);
    CHECK(listing(dir.path() / "out7").count("traj_seed7_omega1.csv") == 1);
    CHECK(listing(dir.path() / "out7").size() == 3);
}

TEST_CASE("identity omega reproduces the unmodified samplers byte for byte") {
    TempDir dir("identity");
    const auto mixture = GaussianMixture::scalar({0.4, 0.6}, {-1.0, 1.5}, {0.3, 0.5});
    const MixtureDenoiser denoiser(mixture);
    for (const std::string kind : {"ddim", "euler", "flow"}) {
        json config = base_config();
        config["sampler"] = kind;
        const auto path = put_config(dir, config, kind + ".json");
        REQUIRE(sample(path, dir.path() / kind) == kExitOk);

        SamplerConfig sampler;
        sampler.kind = parse_sampler_kind(kind);
        std::vector<Latent> states;
        if (kind == "ddim") {
            sampler.schedule = alpha_bar_from_betas(make_linear_beta());
            const Latent z = initial_latent(sampler, 4, 4, 5);
            states = test::vanilla_ddim(denoiser, std::get<AlphaBarSchedule>(sampler.schedule), 20, z);
        } else if (kind == "euler") {
            sampler.schedule = karras_sigmas(20);
            const Latent z = initial_latent(sampler, 4, 4, 5);
            states = test::vanilla_euler(denoiser, std::get<SigmaSchedule>(sampler.schedule), z);
        } else {
            sampler.schedule = flow_timesteps(20);
            const Latent z = initial_latent(sampler, 4, 4, 5);
            states = test::vanilla_flow(denoiser, std::get<FlowTimesteps>(sampler.schedule), z);
        }
        std::vector<LatentState> expected;
        for (std::size_t s : {0, 5, 10, 20}) {
            expected.push_back({s, states[s]});
        }
        std::ostringstream csv;
        write_snapshots_csv(csv, expected);
        CHECK(read_file(dir.path() / kind / "traj_seed5_omega0.csv") == csv.str());
    }
}

TEST_CASE("reruns reproduce artifact checksums") {
    TempDir dir("rerun");
    json config = base_config();
    config["omega"]["omega"] = {0.95, 1.05};
    config["snapshot_format"] = "binary";
    config["sampler"] = "euler";
    config["schedule"]["churn"] = 0.3;
    const auto path = put_config(dir, config);
    RunOptions serial;
    serial.threads = 1;
    RunOptions parallel;
    parallel.threads = 3;
    REQUIRE(sample(path, dir.path() / "a", serial) == kExitOk);
    REQUIRE(sample(path, dir.path() / "b", parallel) == kExitOk);
    const json a = read_json(dir.path() / "a" / "manifest.json");
    const json b = read_json(dir.path() / "b" / "manifest.json");
    CHECK(a["artifacts"] == b["artifacts"]);
    std::ifstream in(dir.path() / "a" / "traj_seed5_omega0.bin", std::ios::binary);
    CHECK(read_snapshots_binary(in).size() == 4);
}

TEST_CASE("exit codes") {
    TempDir dir("exit");
    json bad = base_config();
    bad["latent"]["depth"] = 3;
    const auto bad_path = put_config(dir, bad, "bad.json");
    CHECK(sample(bad_path, dir.path() / "bad") == kExitConfigError);
    CHECK(read_json(dir.path() / "bad" / "manifest.json")["status"] == "config_error");
    CHECK(sample(dir.path() / "nope.json", dir.path() / "nope") == kExitConfigError);

    json blowup = base_config();
    blowup["omega"]["omega"] = {1e300};
    const auto blow_path = put_config(dir, blowup, "blowup.json");
    CHECK(sample(blow_path, dir.path() / "blow") == kExitNumericAbort);
    const json manifest = read_json(dir.path() / "blow" / "manifest.json");
    CHECK(manifest["status"] == "numeric_abort");
    REQUIRE(manifest["error"].contains("step"));
    CHECK(manifest["error"]["step"].get<std::size_t>() >= 1);
    CHECK(manifest["error"]["step"].get<std::size_t>() <= 20);
}

TEST_CASE("snr command") {
    TempDir dir("snr");
    json config = base_config();
    config["omega"]["omega"] = {0.9, 1.0, 1.1};
    const auto path = put_config(dir, config);
    RunOptions options;
    options.out_dir = dir.path() / "out";
    std::ostringstream log;
    REQUIRE(cmd_snr(path, options, log) == kExitOk);
    std::istringstream summary(read_file(dir.path() / "out" / "snr_summary.csv"));
    std::string line;
    std::getline(summary, line);
    CHECK(line == "omega,points,max_rel_deviation");
    while (std::getline(summary, line)) {
        const auto first = line.find(',');
        const auto second = line.find(',', first + 1);
        const double omega = std::stod(line.substr(0, first));
        const double dev = std::stod(line.substr(second + 1));
        CHECK(std::stoul(line.substr(first + 1, second - first - 1)) == 1000);
        CHECK(dev <= (omega == 1.0 ? 1e-12 : 1e-9));
    }
    const std::string ordering = read_file(dir.path() / "out" / "snr_ordering.csv");
    CHECK(ordering.find("fail") == std::string::npos);
    CHECK(ordering.find("0.90000000000000002,1,") != std::string::npos);
    CHECK(read_json(dir.path() / "out" / "manifest.json")["artifacts"].size() == 3);

    json euler = config;
    euler["sampler"] = "euler";
    const auto euler_path = put_config(dir, euler, "euler.json");
    CHECK(cmd_snr(euler_path, options, log) == kExitConfigError);
}

TEST_CASE("spectrum command") {
    TempDir dir("spectrum");
    json config = base_config();
    config["oracle"] = {{"kind", "standard_normal"}};
    config["omega"]["omega"] = {1.05, 0.95, 1.0};
    config["latent"] = {{"height", 16}, {"width", 16}};
    config["seeds"] = json::array();
    for (int s = 0; s < 20; ++s) {
        config["seeds"].push_back(s);
    }
    const auto path = put_config(dir, config);
    RunOptions options;
    options.out_dir = dir.path() / "out";
    options.threads = 2;
    std::ostringstream log;
    REQUIRE(cmd_spectrum(path, options, log) == kExitOk);
    const std::string ordering = read_file(dir.path() / "out" / "ordering.csv");
    CHECK(ordering.rfind("check,omega,step,status\n", 0) == 0);
    CHECK(ordering.find("high_band_ordered,all,20,pass") != std::string::npos);
    CHECK(listing(dir.path() / "out").count("band_energy.csv") == 1);

    json field = config;
    field["oracle"] = {{"kind", "field"}, {"exponent", -2.0}};
    const auto field_path = put_config(dir, field, "field.json");
    CHECK(cmd_spectrum(field_path, options, log) == kExitOk);

    json tiny = config;
    tiny["latent"] = {{"height", 1}, {"width", 16}};
    const auto tiny_path = put_config(dir, tiny, "tiny.json");
    CHECK(cmd_spectrum(tiny_path, options, log) == kExitConfigError);
}

TEST_CASE("spectra of a constant latent sit in DC") {
    const auto p = radial_spectrum(Latent(8, 8, -0.75));
    for (std::size_t b = 1; b < p.bins(); ++b) {
        CHECK(p.mean_power[b] == doctest::Approx(0.0));
    }
}

TEST_CASE("preview mask") {
    TempDir dir("pmask");
    write_pgm_file(dir.path() / "ones.pgm", 4, 6, 255);
    PreviewRequest request;
    request.kind = PreviewKind::kMask;
    request.mask_path = dir.path() / "ones.pgm";
    request.omega_lo = 1.0;
    request.omega_hi = 1.0;
    request.out_dir = dir.path() / "out";
    std::ostringstream log;
    REQUIRE(cmd_preview(request, log) == kExitOk);
    CHECK(read_file(dir.path() / "out" / "mask_omega.csv") ==
          "1,1,1,1,1,1\n1,1,1,1,1,1\n1,1,1,1,1,1\n1,1,1,1,1,1\n");
    const GrayImage img = read_pgm(dir.path() / "out" / "mask_omega.pgm");
    CHECK(img.width == 6);
    CHECK(img.pixels == std::vector<std::uint8_t>(24, 128));

    write_file(dir.path() / "bad.pgm", "P2\n1 1\n255\n0\n");
    request.mask_path = dir.path() / "bad.pgm";
    CHECK(cmd_preview(request, log) == kExitConfigError);
}

TEST_CASE("preview schedules") {
    TempDir dir("psched");
    PreviewRequest request;
    request.kind = PreviewKind::kSchedule;
    request.schedule = "two_stage";
    request.schedule_kind = TwoStageSchedule{10, 0.9, 1.0};
    request.steps = 50;
    request.out_dir = dir.path() / "two";
    std::ostringstream log;
    REQUIRE(cmd_preview(request, log) == kExitOk);
    std::istringstream rows(read_file(dir.path() / "two" / "schedule_omega.csv"));
    std::string line;
    std::getline(rows, line);
    std::vector<double> values;
    while (std::getline(rows, line)) {
        values.push_back(std::stod(line.substr(line.find(',') + 1)));
    }
    REQUIRE(values.size() == 50);
    for (std::size_t s = 0; s < 50; ++s) {
        CHECK(values[s] == (s < 10 ? 0.9 : 1.0));
    }

    request.schedule = "EXP2";
    request.out_dir = dir.path() / "exp2";
    REQUIRE(cmd_preview(request, log) == kExitOk);
    std::istringstream exp_rows(read_file(dir.path() / "exp2" / "schedule_omega.csv"));
    std::getline(exp_rows, line);
    values.clear();
    while (std::getline(exp_rows, line)) {
        values.push_back(std::stod(line.substr(line.find(',') + 1)));
    }
    REQUIRE(values.size() == 50);
    CHECK(values.front() < 1.0);
    CHECK(values.back() > 1.0);

    request.schedule = "NOPE";
    request.out_dir = dir.path() / "nope";
    CHECK(cmd_preview(request, log) == kExitConfigError);
}

TEST_CASE("thread resolution order") {
    RunOptions options;
    ::unsetenv("OMEGANCE_THREADS");
    CHECK(resolve_threads(options, 3) == 3);
    CHECK(resolve_threads(options, std::nullopt) >= 1);
    ::setenv("OMEGANCE_THREADS", "5", 1);
    CHECK(resolve_threads(options, 3) == 5);
    options.threads = 2;
    CHECK(resolve_threads(options, 3) == 2);
    ::setenv("OMEGANCE_THREADS", "junk", 1);
    options.threads.reset();
    CHECK(resolve_threads(options, 4) == 4);
    ::unsetenv("OMEGANCE_THREADS");
}

TEST_CASE("commands leave their inputs untouched") {
    TempDir dir("inputs");
    write_pgm_file(dir.path() / "mask.pgm", 4, 4, 200);
    json config = base_config();
    config["omega"]["mask"] = {{"path", "mask.pgm"}};
    const auto path = put_config(dir, config);
    const std::string config_hash = sha256_file(path);
    const std::string mask_hash = sha256_file(dir.path() / "mask.pgm");
    REQUIRE(sample(path, dir.path() / "out") == kExitOk);
    PreviewRequest request;
    request.kind = PreviewKind::kMask;
    request.config_path = path;
    request.out_dir = dir.path() / "preview";
    std::ostringstream log;
    REQUIRE(cmd_preview(request, log) == kExitOk);
    CHECK(sha256_file(path) == config_hash);
    CHECK(sha256_file(dir.path() / "mask.pgm") == mask_hash);
    CHECK(read_json(dir.path() / "out" / "manifest.json")["config"]["omega"]["mask"]["path"] == "mask.pgm");
}
