#include "sicbo/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "sicbo/diagnostics.hpp"

namespace sicbo::io {

using nlohmann::json;

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    // Trim to the shortest representation that still round-trips.
    for (int prec = 1; prec < 17; ++prec) {
        char probe[32];
        std::snprintf(probe, sizeof probe, "%.*g", prec, v);
        double back;
        std::sscanf(probe, "%lf", &back);
        if (back == v) return probe;
    }
    return buf;
}

static const char* stop_kind_name(StopRule::Kind k) {
    switch (k) {
        case StopRule::Kind::MaxIterOnly: return "max_iter_only";
        case StopRule::Kind::StepNorm: return "step_norm";
        case StopRule::Kind::StepNormAndSlope: return "step_norm_and_slope";
        case StopRule::Kind::FunChange: return "fun_change";
    }
    return "?";
}

static StopRule::Kind stop_kind_from(const std::string& s) {
    if (s == "max_iter_only") return StopRule::Kind::MaxIterOnly;
    if (s == "step_norm") return StopRule::Kind::StepNorm;
    if (s == "step_norm_and_slope") return StopRule::Kind::StepNormAndSlope;
    if (s == "fun_change") return StopRule::Kind::FunChange;
    throw std::invalid_argument("unknown stop rule: " + s);
}

json config_to_json(const SicboConfig& c) {
    json j;
    j["n_particles"] = c.n_particles;
    j["beta"] = c.beta;
    j["gamma"] = c.gamma;
    j["zeta"] = c.zeta;
    j["schedule"] = {
        {"kind", c.schedule.kind == MuSchedule::Kind::InversePower ? "inverse_power" : "exponential"},
        {"exponent", c.schedule.exponent},
        {"mu0", c.schedule.mu0},
    };
    j["stop"] = {
        {"kind", stop_kind_name(c.stop.kind)},
        {"eps1", c.stop.eps1},
        {"eps2", c.stop.eps2},
        {"max_k", c.stop.max_k},
    };
    j["max_iter"] = c.max_iter;
    j["seed"] = c.seed;
    j["noise"] = c.noise == NoiseMode::Shared ? "shared" : "per_particle";
    json box = json::array();
    for (const Interval& iv : c.init_box) box.push_back({iv.lo, iv.hi});
    j["init_box"] = std::move(box);
    return j;
}

SicboConfig config_from_json(const json& j) {
    SicboConfig c;
    c.n_particles = j.at("n_particles").get<int>();
    c.beta = j.at("beta").get<double>();
    c.gamma = j.at("gamma").get<double>();
    c.zeta = j.at("zeta").get<double>();
    const json& s = j.at("schedule");
    c.schedule.kind = s.at("kind").get<std::string>() == "exponential"
                          ? MuSchedule::Kind::Exponential
                          : MuSchedule::Kind::InversePower;
    c.schedule.exponent = s.at("exponent").get<double>();
    c.schedule.mu0 = s.at("mu0").get<double>();
    const json& st = j.at("stop");
    c.stop.kind = stop_kind_from(st.at("kind").get<std::string>());
    c.stop.eps1 = st.at("eps1").get<double>();
    c.stop.eps2 = st.at("eps2").get<double>();
    c.stop.max_k = st.at("max_k").get<std::int64_t>();
    c.max_iter = j.at("max_iter").get<std::int64_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.noise = j.at("noise").get<std::string>() == "per_particle" ? NoiseMode::PerParticle
                                                                 : NoiseMode::Shared;
    c.init_box.clear();
    for (const json& iv : j.at("init_box")) {
        c.init_box.push_back(Interval{iv.at(0).get<double>(), iv.at(1).get<double>()});
    }
    return c;
}

json report_to_json(const RunReport& r, bool include_factors) {
    json j;
    j["schema_version"] = kReportSchemaVersion;
    j["config"] = config_to_json(r.config);
    j["seed"] = r.config.seed;
    j["iterations"] = r.iterations;
    j["iteration_capped"] = r.iteration_capped;
    j["consensus_condition"] = {
        {"satisfied", r.condition.satisfied},
        {"contraction", r.condition.contraction},
    };
    j["initial_dispersion"] = r.initial_dispersion.d_l;
    j["final"] = {
        {"consensus", r.final_consensus},
        {"diameter", r.final_diameter},
    };
    j["trace"] = {
        {"mu", r.trace.mu},
        {"diameter", r.trace.diameter},
        {"best_value", r.trace.best_value},
        {"mean_value", r.trace.mean_value},
        {"mean_sq_dev", r.trace.mean_sq_dev},
    };
    if (include_factors && r.trace.has_factors()) {
        j["trace"]["factors"] = r.trace.factors;
        j["trace"]["factors_dim"] = r.trace.dim;
    }
    return j;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
    std::string out = "function,N,beta,suc_rat,sol_err,fun_err,n_trials,base_seed\n";
    for (const BenchRow& r : rows) {
        out += r.function;
        out += ',';
        out += std::to_string(r.n_particles);
        out += ',';
        out += format_double(r.beta);
        out += ',';
        out += format_double(r.summary.suc_rat);
        out += ',';
        out += format_double(r.summary.mean_sol_err);
        out += ',';
        out += format_double(r.summary.mean_fun_err);
        out += ',';
        out += std::to_string(r.summary.n_trials);
        out += ',';
        out += std::to_string(r.base_seed);
        out += '\n';
    }
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << content;
}

}  // namespace sicbo::io
