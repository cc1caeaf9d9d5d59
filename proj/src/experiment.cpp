// Copyright 2026 The Omegance Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "omegance/experiment.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "omegance/error.hpp"

namespace omegance {

namespace {

using nlohmann::json;

// Literals built in code are signed even when parsed files would be unsigned.
bool non_negative_integer(const json& value) {
    return value.is_number_unsigned() || (value.is_number_integer() && value.get<std::int64_t>() >= 0);
}

// Reads keys off a JSON object and rejects any key left unread.
class ObjectReader {
public:
    ObjectReader(const json& object, std::string where) : m_object(object), m_where(std::move(where)) {
        if (!m_object.is_object()) {
            throw ConfigError(m_where + ": expected an object");
        }
    }

    bool has(const std::string& key) const { return m_object.contains(key); }

    const json& raw(const std::string& key) {
        m_seen.insert(key);
        return m_object.at(key);
    }

    template <class T>
    std::optional<T> optional(const std::string& key) {
        if (!has(key)) {
            return std::nullopt;
        }
        const json& value = raw(key);
        try {
            return value.get<T>();
        } catch (const json::exception&) {
            throw ConfigError(path(key) + ": wrong type");
        }
    }

    template <class T>
    T required(const std::string& key) {
        if (!has(key)) {
            throw ConfigError(path(key) + ": missing required key");
        }
        return *optional<T>(key);
    }

    double number(const std::string& key, double fallback) {
        if (!has(key)) {
            return fallback;
        }
        const json& value = raw(key);
        if (!value.is_number()) {
            throw ConfigError(path(key) + ": expected a number");
        }
        const double v = value.get<double>();
        if (!std::isfinite(v)) {
            throw ConfigError(path(key) + ": must be finite");
        }
        return v;
    }

    std::size_t count(const std::string& key, std::size_t fallback) {
        if (!has(key)) {
            return fallback;
        }
        const json& value = raw(key);
        if (!non_negative_integer(value)) {
            throw ConfigError(path(key) + ": expected a non-negative integer");
        }
        return value.get<std::size_t>();
    }

    std::vector<double> numbers(const std::string& key) {
        const json& value = raw(key);
        if (!value.is_array()) {
            throw ConfigError(path(key) + ": expected an array of numbers");
        }
        std::vector<double> out;
        for (const auto& item : value) {
            if (!item.is_number() || !std::isfinite(item.get<double>())) {
                throw ConfigError(path(key) + ": expected finite numbers");
            }
            out.push_back(item.get<double>());
        }
        return out;
    }

    void finish() const {
        for (const auto& [key, value] : m_object.items()) {
            if (!m_seen.contains(key)) {
                throw ConfigError(path(key) + ": unknown key");
            }
        }
    }

    std::string path(const std::string& key) const { return m_where + "." + key; }

private:
    const json& m_object;
    std::string m_where;
    std::set<std::string> m_seen;
};

std::vector<std::vector<double>> read_component_table(ObjectReader& reader, const std::string& key) {
    const json& value = reader.raw(key);
    if (!value.is_array() || value.empty()) {
        throw ConfigError(reader.path(key) + ": expected a non-empty array");
    }
    std::vector<std::vector<double>> table;
    for (const auto& entry : value) {
        if (entry.is_number()) {
            table.push_back({entry.get<double>()});
        } else if (entry.is_array()) {
            std::vector<double> row;
            for (const auto& x : entry) {
                if (!x.is_number()) {
                    throw ConfigError(reader.path(key) + ": expected numbers");
                }
                row.push_back(x.get<double>());
            }
            table.push_back(std::move(row));
        } else {
            throw ConfigError(reader.path(key) + ": entries must be numbers or arrays of numbers");
        }
    }
    return table;
}

ScheduleSpec parse_schedule_spec(const json& value) {
    ObjectReader reader(value, "omega.schedule");
    ScheduleSpec spec;
    if (reader.has("preset")) {
        spec.preset = reader.required<std::string>("preset");
        reader.finish();
        return spec;
    }
    const auto kind = reader.required<std::string>("kind");
    if (kind == "constant") {
        spec.kind = ConstantSchedule{reader.number("omega", 1.0)};
    } else if (kind == "two_stage") {
        spec.kind = TwoStageSchedule{reader.count("tau", 10), reader.number("omega_in", 1.0),
                                     reader.number("omega_out", 1.0)};
    } else if (kind == "exp") {
        spec.kind = ExpSchedule{reader.number("A", 0.0), reader.number("lambda", 1.0), reader.number("B", 0.0)};
    } else if (kind == "cos") {
        spec.kind = CosSchedule{reader.number("A", 0.0), reader.number("B", 0.0)};
    } else {
        throw ConfigError("omega.schedule.kind: unknown kind '" + kind + "'");
    }
    reader.finish();
    return spec;
}

OmegaSpec parse_omega(const json& value, const std::filesystem::path& base_dir) {
    ObjectReader reader(value, "omega");
    OmegaSpec spec;
    if (reader.has("varpi") && reader.has("omega")) {
        throw ConfigError("omega: give either varpi or omega, not both");
    }
    if (reader.has("varpi")) {
        spec.varpi = reader.numbers("varpi");
        if (spec.varpi.empty()) {
            throw ConfigError("omega.varpi: must not be empty");
        }
    } else if (reader.has("omega")) {
        spec.raw = reader.numbers("omega");
        if (spec.raw.empty()) {
            throw ConfigError("omega.omega: must not be empty");
        }
        for (double w : spec.raw) {
            if (w <= 0.0) {
                throw ConfigError("omega.omega: values must be positive");
            }
        }
    } else {
        spec.raw = {1.0};
    }
    if (reader.has("rescale")) {
        ObjectReader r(reader.raw("rescale"), "omega.rescale");
        spec.rescale.k = r.number("k", spec.rescale.k);
        spec.rescale.lower = r.number("L", spec.rescale.lower);
        spec.rescale.upper = r.number("U", spec.rescale.upper);
        r.finish();
    }
    try {
        spec.rescale.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("omega.rescale: ") + e.what());
    }
    if (reader.has("mask")) {
        ObjectReader m(reader.raw("mask"), "omega.mask");
        MaskSpec mask;
        const auto path = std::filesystem::path(m.required<std::string>("path"));
        mask.path = path.is_absolute() ? path : base_dir / path;
        mask.factor = m.count("factor", 1);
        mask.omega_lo = m.number("omega_lo", mask.omega_lo);
        mask.omega_hi = m.number("omega_hi", mask.omega_hi);
        const auto pooling = m.optional<std::string>("pooling").value_or("average");
        if (pooling == "average") {
            mask.pooling = Pooling::kAverage;
        } else if (pooling == "nearest") {
            mask.pooling = Pooling::kNearest;
        } else {
            throw ConfigError("omega.mask.pooling: expected 'average' or 'nearest'");
        }
        m.finish();
        if (mask.factor == 0) {
            throw ConfigError("omega.mask.factor: must be positive");
        }
        if (!(mask.omega_lo > 0.0 && mask.omega_lo <= mask.omega_hi)) {
            throw ConfigError("omega.mask: bounds must satisfy 0 < omega_lo <= omega_hi");
        }
        spec.mask = std::move(mask);
    }
    if (reader.has("schedule")) {
        spec.schedule = parse_schedule_spec(reader.raw("schedule"));
    }
    reader.finish();
    return spec;
}

OracleSpec parse_oracle(const json& value) {
    ObjectReader reader(value, "oracle");
    const auto kind = reader.required<std::string>("kind");
    OracleSpec spec;
    if (kind == "standard_normal") {
        spec = StandardNormalOracle{};
    } else if (kind == "mixture") {
        MixtureOracle m;
        m.weights = reader.numbers("weights");
        m.means = read_component_table(reader, "means");
        m.variances = read_component_table(reader, "variances");
        spec = std::move(m);
    } else if (kind == "field") {
        spec = FieldOracle{reader.number("exponent", -2.0)};
    } else {
        throw ConfigError("oracle.kind: unknown kind '" + kind + "'");
    }
    reader.finish();
    return spec;
}

json schedule_kind_json(const ScheduleSpec& spec) {
    if (spec.preset) {
        return {{"preset", *spec.preset}};
    }
    return std::visit(
        [](const auto& s) -> json {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, ConstantSchedule>) {
                return {{"kind", "constant"}, {"omega", s.omega}};
            } else if constexpr (std::is_same_v<S, TwoStageSchedule>) {
                return {{"kind", "two_stage"}, {"tau", s.tau}, {"omega_in", s.omega_in}, {"omega_out", s.omega_out}};
            } else if constexpr (std::is_same_v<S, ExpSchedule>) {
                return {{"kind", "exp"}, {"A", s.amplitude}, {"lambda", s.rate}, {"B", s.offset}};
            } else {
                return {{"kind", "cos"}, {"A", s.amplitude}, {"B", s.offset}};
            }
        },
        spec.kind);
}

}  // namespace

std::vector<double> OmegaSpec::sweep() const {
    if (!varpi.empty()) {
        std::vector<double> out;
        for (double v : varpi) {
            out.push_back(omegance::rescale(v, rescale).value());
        }
        return out;
    }
    return raw;
}

json ExperimentConfig::to_json() const {
    json out;
    out["sampler"] = to_string(sampler);
    out["schedule"] = {{"T", schedule.T},
                       {"beta_start", schedule.beta_start},
                       {"beta_end", schedule.beta_end},
                       {"sigma_min", schedule.sigma_min},
                       {"sigma_max", schedule.sigma_max},
                       {"rho", schedule.rho},
                       {"churn", schedule.churn}};
    out["steps"] = steps;
    json omega_json;
    if (!omega.varpi.empty()) {
        omega_json["varpi"] = omega.varpi;
    } else {
        omega_json["omega"] = omega.raw;
    }
    omega_json["resolved_omega"] = omega.sweep();
    omega_json["rescale"] = {{"k", omega.rescale.k}, {"L", omega.rescale.lower}, {"U", omega.rescale.upper}};
    if (omega.mask) {
        omega_json["mask"] = {{"path", omega.mask->path.filename().string()},
                              {"factor", omega.mask->factor},
                              {"omega_lo", omega.mask->omega_lo},
                              {"omega_hi", omega.mask->omega_hi},
                              {"pooling", omega.mask->pooling == Pooling::kAverage ? "average" : "nearest"}};
    }
    if (omega.schedule) {
        omega_json["schedule"] = schedule_kind_json(*omega.schedule);
    }
    out["omega"] = omega_json;
    out["oracle"] = std::visit(
        [](const auto& o) -> json {
            using O = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<O, StandardNormalOracle>) {
                return {{"kind", "standard_normal"}};
            } else if constexpr (std::is_same_v<O, MixtureOracle>) {
                return {{"kind", "mixture"}, {"weights", o.weights}, {"means", o.means}, {"variances", o.variances}};
            } else {
                return {{"kind", "field"}, {"exponent", o.exponent}};
            }
        },
        oracle);
    out["latent"] = {{"height", height}, {"width", width}};
    out["seeds"] = seeds;
    out["snapshot_steps"] = snapshot_steps;
    out["snapshot_format"] = snapshot_format == SnapshotFormat::kCsv ? "csv" : "binary";
    out["band_split"] = band_split;
    return out;
}

ExperimentConfig parse_experiment_config(const json& document, const std::filesystem::path& base_dir) {
    ObjectReader reader(document, "config");
    ExperimentConfig config;
    if (reader.has("sampler")) {
        const auto name = reader.required<std::string>("sampler");
        try {
            config.sampler = parse_sampler_kind(name);
        } catch (const InvalidArgument& e) {
            throw ConfigError(std::string("config.sampler: ") + e.what());
        }
    }
    if (reader.has("schedule")) {
        ObjectReader s(reader.raw("schedule"), "schedule");
        config.schedule.T = s.count("T", config.schedule.T);
        config.schedule.beta_start = s.number("beta_start", config.schedule.beta_start);
        config.schedule.beta_end = s.number("beta_end", config.schedule.beta_end);
        config.schedule.sigma_min = s.number("sigma_min", config.schedule.sigma_min);
        config.schedule.sigma_max = s.number("sigma_max", config.schedule.sigma_max);
        config.schedule.rho = s.number("rho", config.schedule.rho);
        config.schedule.churn = s.number("churn", config.schedule.churn);
        s.finish();
    }
    config.steps = reader.count("steps", config.steps);
    if (config.steps == 0) {
        throw ConfigError("config.steps: must be at least 1");
    }
    if (reader.has("omega")) {
        config.omega = parse_omega(reader.raw("omega"), base_dir);
    } else {
        config.omega.raw = {1.0};
    }
    if (reader.has("oracle")) {
        config.oracle = parse_oracle(reader.raw("oracle"));
    }
    if (reader.has("latent")) {
        ObjectReader l(reader.raw("latent"), "latent");
        config.height = l.count("height", config.height);
        config.width = l.count("width", config.width);
        l.finish();
        if (config.height == 0 || config.width == 0) {
            throw ConfigError("latent: dims must be positive");
        }
    }
    if (reader.has("seeds")) {
        const json& seeds = reader.raw("seeds");
        if (!seeds.is_array() || seeds.empty()) {
            throw ConfigError("config.seeds: expected a non-empty array of integers");
        }
        config.seeds.clear();
        for (const auto& s : seeds) {
            if (!non_negative_integer(s)) {
                throw ConfigError("config.seeds: expected non-negative integers");
            }
            config.seeds.push_back(s.get<std::uint64_t>());
        }
    }
    if (reader.has("output_dir")) {
        const auto dir = std::filesystem::path(reader.required<std::string>("output_dir"));
        config.output_dir = dir.is_absolute() ? dir : base_dir / dir;
    } else {
        config.output_dir = base_dir / "out";
    }
    if (reader.has("snapshot_steps")) {
        const json& steps = reader.raw("snapshot_steps");
        if (!steps.is_array()) {
            throw ConfigError("config.snapshot_steps: expected an array of integers");
        }
        for (const auto& s : steps) {
            if (!non_negative_integer(s) || s.get<std::size_t>() > config.steps) {
                throw ConfigError("config.snapshot_steps: entries must be integers in [0, steps]");
            }
            config.snapshot_steps.push_back(s.get<std::size_t>());
        }
    }
    if (reader.has("snapshot_format")) {
        const auto format = reader.required<std::string>("snapshot_format");
        if (format == "csv") {
            config.snapshot_format = SnapshotFormat::kCsv;
        } else if (format == "binary") {
            config.snapshot_format = SnapshotFormat::kBinary;
        } else {
            throw ConfigError("config.snapshot_format: expected 'csv' or 'binary'");
        }
    }
    config.band_split = reader.number("band_split", 0.0);
    if (reader.has("threads")) {
        config.threads = reader.count("threads", 1);
    }
    reader.finish();

    // Value-level checks that need the assembled config.
    try {
        (void)make_schedule(config);
        (void)make_denoiser(config);
        for (double w : config.omega.sweep()) {
            (void)OmegaValue(w);
        }
        (void)make_omega_control(config, 1.0);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return config;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config " + path.string());
    }
    json document;
    try {
        document = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_experiment_config(document, path.parent_path());
}

std::unique_ptr<Denoiser> make_denoiser(const ExperimentConfig& config) {
    return std::visit(
        [&](const auto& o) -> std::unique_ptr<Denoiser> {
            using O = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<O, StandardNormalOracle>) {
                return std::make_unique<MixtureDenoiser>(GaussianMixture::standard_normal());
            } else if constexpr (std::is_same_v<O, MixtureOracle>) {
                return std::make_unique<MixtureDenoiser>(GaussianMixture(o.weights, o.means, o.variances));
            } else {
                return std::make_unique<GaussianFieldDenoiser>(GaussianField2D{config.height, config.width, o.exponent});
            }
        },
        config.oracle);
}

ScheduleData make_schedule(const ExperimentConfig& config) {
    const auto& s = config.schedule;
    switch (config.sampler) {
        case SamplerKind::kDdim:
            return alpha_bar_from_betas(make_linear_beta(s.T, s.beta_start, s.beta_end));
        case SamplerKind::kEuler:
            return karras_sigmas(config.steps, s.sigma_min, s.sigma_max, s.rho, s.churn);
        case SamplerKind::kFlow:
            return flow_timesteps(config.steps);
    }
    throw ConfigError("unknown sampler kind");
}

OmegaControl make_omega_control(const ExperimentConfig& config, double base) {
    std::optional<OmegaMask> mask;
    if (config.omega.mask) {
        const auto& spec = *config.omega.mask;
        const GrayImage image = read_pgm(spec.path);
        mask = mask_from_grayscale(image, spec.factor, spec.omega_lo, spec.omega_hi, spec.pooling);
        if (mask->rows() != config.height || mask->cols() != config.width) {
            throw ConfigError("mask " + spec.path.filename().string() + " downsamples to " +
                              std::to_string(mask->rows()) + "x" + std::to_string(mask->cols()) +
                              " but the latent is " + std::to_string(config.height) + "x" +
                              std::to_string(config.width));
        }
    }
    std::optional<OmegaSchedule> schedule;
    if (config.omega.schedule) {
        const auto& spec = *config.omega.schedule;
        schedule = spec.preset ? OmegaSchedule::preset(*spec.preset, config.steps)
                               : OmegaSchedule(spec.kind, config.steps);
    }
    return OmegaControl(base, std::move(mask), std::move(schedule));
}

SamplerConfig make_sampler_config(const ExperimentConfig& config, double base_omega, std::uint64_t seed) {
    SamplerConfig sampler;
    sampler.kind = config.sampler;
    sampler.schedule = make_schedule(config);
    sampler.steps = config.steps;
    sampler.omega = make_omega_control(config, base_omega);
    sampler.seed = seed;
    sampler.snapshot_steps = config.snapshot_steps;
    return sampler;
}

}  // namespace omegance
