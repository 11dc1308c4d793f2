#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "burrjoint/data.hpp"
#include "burrjoint/error.hpp"
#include "burrjoint/fit_bayes.hpp"
#include "burrjoint/fit_mle.hpp"
#include "burrjoint/mcstudy.hpp"
#include "burrjoint/model.hpp"
#include "burrjoint/predict.hpp"
#include "burrjoint/sample_io.hpp"
#include "burrjoint/shrink.hpp"

namespace burrjoint::cli {

using json = nlohmann::ordered_json;

enum ExitCode : int { kOk = 0, kInputError = 2, kNumericalFailure = 3, kPartialStudy = 4 };

// ---------------------------------------------------------------- tables

/// A named output table; rendered as CSV (with a leading `# config:` line) or
/// as an array of JSON objects.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;

  void add(std::vector<json> row) { rows.push_back(std::move(row)); }
};

inline std::string csv_cell(const json& v) {
  if (v.is_number_float()) return io::format_double(v.get<double>());
  if (v.is_number()) return v.dump();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_null()) return "NA";
  std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") != std::string::npos) {
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  return s;
}

/// Finite doubles as numbers, everything else as null.
inline json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline void write_csv(std::ostream& out, const Table& t, const json& config) {
  out << "# config: " << config.dump() << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_cell(row[i]);
    out << '\n';
  }
}

inline json table_json(const Table& t) {
  json arr = json::array();
  for (const auto& row : t.rows) {
    json obj = json::object();
    for (std::size_t i = 0; i < t.columns.size(); ++i) obj[t.columns[i]] = row[i];
    arr.push_back(obj);
  }
  return arr;
}

/// Writes tables to `dir` as <name>.csv files, or one report.json.
inline std::vector<std::string> emit(const std::string& dir, const std::string& format, const std::vector<Table>& tables,
                                     const json& config, const json& extra = json::object()) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, ErrorKind::Io, "cannot create output directory " + dir);
  std::vector<std::string> written;
  if (format == "json") {
    json report = json::object();
    report["config"] = config;
    for (const auto& [k, v] : extra.items()) report[k] = v;
    for (const auto& t : tables) report[t.name] = table_json(t);
    const std::string path = (std::filesystem::path(dir) / "report.json").string();
    std::ofstream out(path);
    require(out.good(), ErrorKind::Io, "cannot write " + path);
    out << report.dump(2) << '\n';
    written.push_back(path);
    return written;
  }
  for (const auto& t : tables) {
    const std::string path = (std::filesystem::path(dir) / (t.name + ".csv")).string();
    std::ofstream out(path);
    require(out.good(), ErrorKind::Io, "cannot write " + path);
    write_csv(out, t, config);
    written.push_back(path);
  }
  if (!extra.empty()) {
    json summary = json::object();
    summary["config"] = config;
    for (const auto& [k, v] : extra.items()) summary[k] = v;
    const std::string path = (std::filesystem::path(dir) / "summary.json").string();
    std::ofstream out(path);
    require(out.good(), ErrorKind::Io, "cannot write " + path);
    out << summary.dump(2) << '\n';
    written.push_back(path);
  }
  return written;
}

// ---------------------------------------------------------------- config

inline json theta_json(const ThetaVector& t) { return json::array({t[0], t[1], t[2], t[3]}); }

inline ThetaVector theta_from_json(const json& j, const std::string& what) {
  require(j.is_array() && j.size() == 4, ErrorKind::Config, what + " must be an array of four numbers");
  ThetaVector t;
  for (int i = 0; i < 4; ++i) {
    require(j[i].is_number(), ErrorKind::Config, what + " must contain numbers");
    t[i] = j[i].get<double>();
  }
  return t;
}

inline std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (auto field : io::split_fields(text)) {
    const auto v = io::parse_double(field);
    require(v.has_value(), ErrorKind::Config, "cannot parse " + what + " value '" + std::string(field) + "'");
    out.push_back(*v);
  }
  return out;
}

inline ThetaVector parse_theta(const std::string& text, const std::string& what) {
  const auto v = parse_number_list(text, what);
  require(v.size() == 4, ErrorKind::Config, what + " needs four comma-separated values");
  return ThetaVector(v[0], v[1], v[2], v[3]);
}

inline json priors_json(const GammaPriors& p) {
  return json{{"a1", p.a1}, {"b1", p.b1}, {"c1", p.c1}, {"d1", p.d1},
              {"a2", p.a2}, {"b2", p.b2}, {"c2", p.c2}, {"d2", p.d2}};
}

inline GammaPriors priors_from_json(const json& j) {
  if (j.is_array()) {
    require(j.size() == 8, ErrorKind::Config, "priors array needs a1,b1,c1,d1,a2,b2,c2,d2");
    std::array<double, 8> h{};
    for (int i = 0; i < 8; ++i) h[i] = j[i].get<double>();
    return GammaPriors::make_informative(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7]);
  }
  require(j.is_object(), ErrorKind::Config, "priors must be an object or an array");
  auto get = [&](const char* k) {
    require(j.contains(k) && j[k].is_number(), ErrorKind::Config, std::string("priors.") + k + " missing");
    return j[k].get<double>();
  };
  return GammaPriors::make_informative(get("a1"), get("b1"), get("c1"), get("d1"), get("a2"), get("b2"), get("c2"),
                                       get("d2"));
}

inline GammaPriors parse_priors(const std::string& text) {
  const auto v = parse_number_list(text, "prior");
  require(v.size() == 8, ErrorKind::Config, "--prior needs a1,b1,c1,d1,a2,b2,c2,d2");
  return GammaPriors::make_informative(v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]);
}

inline json losses_json(const std::vector<Loss>& losses) {
  json arr = json::array();
  for (const auto& l : losses) arr.push_back(l.label());
  return arr;
}

inline std::vector<Loss> losses_from_json(const json& j) {
  require(j.is_array(), ErrorKind::Config, "losses must be an array of strings");
  std::vector<Loss> out;
  for (const auto& v : j) out.push_back(parse_loss(v.get<std::string>()));
  return out;
}

inline std::vector<Loss> default_losses() {
  return {Loss::se(), Loss::linex(-0.25), Loss::linex(0.5), Loss::ge(-0.25), Loss::ge(0.5)};
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::Io, "cannot open config " + path);
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    fail(ErrorKind::Config, path + ": " + e.what());
  }
}

/// Settings shared by `fit` and `predict`.
struct AnalysisConfig {
  std::string data;    // joint sample CSV (w,s)
  std::string x_data;  // complete sample of X (goodness of fit)
  std::string y_data;  // complete sample of Y
  std::optional<int> m, n, r;
  std::uint64_t seed = 1;
  double level = 0.95;
  std::size_t draws = 10000;
  double gamma = 1.0;
  std::optional<GammaPriors> informative;
  std::vector<Loss> losses = default_losses();
  std::optional<ThetaVector> theta0;
  double w = 0.5;
  double alpha = 0.05;
  std::vector<int> js{1, 2};
  std::string out = ".";
  std::string format = "csv";

  json to_json() const {
    json j = json::object();
    if (!data.empty()) j["data"] = data;
    if (!x_data.empty()) j["x"] = x_data;
    if (!y_data.empty()) j["y"] = y_data;
    if (m) j["m"] = *m;
    if (n) j["n"] = *n;
    if (r) j["r"] = *r;
    j["seed"] = seed;
    j["level"] = level;
    j["D"] = draws;
    j["gamma"] = gamma;
    if (informative) j["priors"] = priors_json(*informative);
    j["losses"] = losses_json(losses);
    json sh = json{{"w", w}, {"alpha", alpha}};
    if (theta0) sh["theta0"] = theta_json(*theta0);
    j["shrink"] = sh;
    j["j"] = js;
    j["format"] = format;
    return j;
  }

  void apply_json(const json& j) {
    require(j.is_object(), ErrorKind::Config, "config root must be an object");
    try {
      if (j.contains("data")) data = j["data"].get<std::string>();
      if (j.contains("x")) x_data = j["x"].get<std::string>();
      if (j.contains("y")) y_data = j["y"].get<std::string>();
      if (j.contains("m")) m = j["m"].get<int>();
      if (j.contains("n")) n = j["n"].get<int>();
      if (j.contains("r")) r = j["r"].get<int>();
      if (j.contains("seed")) seed = j["seed"].get<std::uint64_t>();
      if (j.contains("level")) level = j["level"].get<double>();
      if (j.contains("D")) draws = j["D"].get<std::size_t>();
      if (j.contains("gamma")) gamma = j["gamma"].get<double>();
      if (j.contains("priors")) informative = priors_from_json(j["priors"]);
      if (j.contains("losses")) losses = losses_from_json(j["losses"]);
      if (j.contains("shrink")) {
        const auto& s = j["shrink"];
        if (s.contains("w")) w = s["w"].get<double>();
        if (s.contains("alpha")) alpha = s["alpha"].get<double>();
        if (s.contains("theta0")) theta0 = theta_from_json(s["theta0"], "shrink.theta0");
      }
      if (j.contains("j")) js = j["j"].get<std::vector<int>>();
      if (j.contains("out")) out = j["out"].get<std::string>();
      if (j.contains("format")) format = j["format"].get<std::string>();
    } catch (const json::exception& e) {
      fail(ErrorKind::Config, std::string("bad config value: ") + e.what());
    }
  }

  void validate() const {
    require(level > 0.0 && level < 1.0, ErrorKind::Config, "--level must lie in (0,1)");
    require(draws >= 1, ErrorKind::Config, "--D must be positive");
    require(format == "csv" || format == "json", ErrorKind::Config, "--format must be csv or json");
    require(!losses.empty(), ErrorKind::Config, "at least one loss is required");
    for (int j : js) require(j >= 1, ErrorKind::Config, "--j values must be positive");
  }

  ShrinkConfig shrink() const { return ShrinkConfig{w, *theta0, alpha}; }
};

/// Reads `m` and `n` from a `# config: {...}` comment in a sample file.
inline std::pair<std::optional<int>, std::optional<int>> sizes_from_header(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# config:", 0) != 0) {
      if (!line.empty() && line[0] == '#') continue;
      break;
    }
    try {
      const json j = json::parse(line.substr(9));
      std::optional<int> m, n;
      if (j.contains("m")) m = j["m"].get<int>();
      if (j.contains("n")) n = j["n"].get<int>();
      return {m, n};
    } catch (const json::exception&) {
      return {};
    }
  }
  return {};
}

/// Loads the joint sample named by the config, applying sizes and the r cut.
inline JointSample load_sample(AnalysisConfig& cfg) {
  require(!cfg.data.empty(), ErrorKind::Config, "a joint sample is required (--data)");
  const auto [hm, hn] = sizes_from_header(cfg.data);
  if (!cfg.m) cfg.m = hm;
  if (!cfg.n) cfg.n = hn;
  require(cfg.m.has_value() && cfg.n.has_value(), ErrorKind::Config, "sample sizes --m and --n are required");
  JointSample s = io::read_sample_csv(cfg.data, *cfg.m, *cfg.n);
  if (cfg.r) {
    require(*cfg.r >= 1 && *cfg.r <= s.r(), ErrorKind::InvalidSample,
            "--r must lie in [1, " + std::to_string(s.r()) + "]");
    s = s.truncated(*cfg.r);
  }
  return s;
}

// ---------------------------------------------------------------- fit

struct PosteriorRun {
  std::string prior;
  WeightedDraws draws;
};

inline std::vector<PosteriorRun> run_posteriors(const JointSample& sample, const AnalysisConfig& cfg) {
  std::vector<PosteriorRun> out;
  Rng rng = make_stream(cfg.seed, 0);
  if (cfg.informative) out.push_back({"IN", importance_sample(sample, *cfg.informative, cfg.draws, rng)});
  out.push_back({"NIN", importance_sample(sample, GammaPriors::quasi(cfg.gamma), cfg.draws, rng)});
  for (const auto& p : out)
    if (p.draws.degenerate)
      std::cerr << "warning: " << p.prior << " importance weights are degenerate (ESS "
                << io::format_double(p.draws.ess) << " of " << p.draws.size() << ")\n";
  return out;
}

inline std::vector<Table> goodness_of_fit_tables(const AnalysisConfig& cfg) {
  Table gof{"goodness_of_fit", {"group", "alpha", "beta", "loglik", "ks_distance", "ks_p_value", "size"}};
  for (const auto& [label, path] : {std::pair<std::string, std::string>{"X", cfg.x_data}, {"Y", cfg.y_data}}) {
    if (path.empty()) continue;
    const auto values = io::read_values(path);
    const PairFit f = fit_complete(values);
    const KsResult ks = ks_test(values, f.params);
    gof.add({label, f.params.alpha, f.params.beta, f.loglik, ks.distance,
             ks.p_value ? json(*ks.p_value) : json(nullptr), static_cast<int>(values.size())});
  }
  return {gof};
}

inline int cmd_fit(AnalysisConfig cfg, std::ostream& log = std::cout) {
  cfg.validate();
  std::vector<Table> tables;
  if (!cfg.x_data.empty() || !cfg.y_data.empty()) {
    for (auto& t : goodness_of_fit_tables(cfg)) tables.push_back(std::move(t));
  }
  json extra = json::object();
  if (!cfg.data.empty()) {
    const JointSample sample = load_sample(cfg);
    const MleFit fit = fit_mle(sample);
    const auto posts = run_posteriors(sample, cfg);

    Table est{"estimates", {"method", "prior", "loss", "theta1", "theta2", "theta3", "theta4"}};
    est.add({"EM", "", "", fit.theta[0], fit.theta[1], fit.theta[2], fit.theta[3]});
    std::vector<std::tuple<std::string, ThetaVector, std::array<double, 4>>> bases;
    bases.emplace_back("EM", fit.theta, fit.information_regular ? asymptotic_variances(fit.information)
                                                                : std::array<double, 4>{numeric::kNaN, numeric::kNaN,
                                                                                        numeric::kNaN, numeric::kNaN});
    for (const auto& p : posts) {
      std::array<double, 4> var{};
      for (int i = 0; i < 4; ++i) var[i] = posterior_variance(p.draws, i);
      for (const auto& loss : cfg.losses) {
        const ThetaVector t = estimate(p.draws, loss);
        est.add({"Bayes", p.prior, loss.label(), t[0], t[1], t[2], t[3]});
        bases.emplace_back(p.prior + "-" + loss.label(), t, var);
      }
    }
    tables.push_back(est);

    Table ints{"intervals", {"method", "prior", "parameter", "lower", "upper", "length"}};
    if (fit.information_regular) {
      const auto a = aci(fit, cfg.level);
      for (int i = 0; i < 4; ++i)
        ints.add({"ACI", "", "theta" + std::to_string(i + 1), a[i].lower, a[i].upper, a[i].length()});
    } else {
      std::cerr << "warning: observed information is singular; no ACI reported\n";
    }
    for (const auto& p : posts)
      for (int i = 0; i < 4; ++i) {
        const Interval c = credible_interval(p.draws, i, cfg.level);
        const Interval h = hpd_interval(p.draws, i, cfg.level);
        ints.add({"CrI", p.prior, "theta" + std::to_string(i + 1), c.lower, c.upper, c.length()});
        ints.add({"HPD", p.prior, "theta" + std::to_string(i + 1), h.lower, h.upper, h.length()});
      }
    tables.push_back(ints);

    if (cfg.theta0) {
      const ShrinkConfig sc = cfg.shrink();
      Table shr{"shrinkage", {"base", "estimator", "theta1", "theta2", "theta3", "theta4"}};
      Table pre{"pretest", {"base", "parameter", "statistic", "critical_value", "shrunk"}};
      for (const auto& [label, theta, var] : bases) {
        const ThetaVector ls = linear_shrink(theta, sc);
        shr.add({label, "LS", ls[0], ls[1], ls[2], ls[3]});
        bool var_ok = true;
        for (double v : var) var_ok = var_ok && std::isfinite(v) && v > 0.0;
        if (!var_ok) continue;
        const PretestResult sp = shrink_pretest(theta, var, sample.r(), sc);
        shr.add({label, "SP", sp.theta[0], sp.theta[1], sp.theta[2], sp.theta[3]});
        for (int i = 0; i < 4; ++i)
          pre.add({label, "theta" + std::to_string(i + 1), sp.statistic[i], sc.critical_value(), sp.shrunk[i]});
      }
      tables.push_back(shr);
      tables.push_back(pre);
    }

    json diag = json::object();
    diag["r"] = sample.r();
    diag["m_r"] = sample.m_r();
    diag["n_r"] = sample.n_r();
    diag["case"] = sample.fully_observed() ? "complete" : to_string(classify_case(sample));
    diag["loglik"] = fit.loglik;
    diag["mle_iterations"] = fit.iterations;
    diag["information_regular"] = fit.information_regular;
    for (const auto& p : posts) {
      diag["ess_" + p.prior] = p.draws.ess;
      diag["degenerate_" + p.prior] = p.draws.degenerate;
    }
    extra["diagnostics"] = diag;
  }
  require(!tables.empty(), ErrorKind::Config, "nothing to fit: give --data and/or --x/--y");
  for (const auto& path : emit(cfg.out, cfg.format, tables, cfg.to_json(), extra)) log << path << '\n';
  return kOk;
}

// ---------------------------------------------------------------- predict

inline int cmd_predict(AnalysisConfig cfg, std::ostream& log = std::cout) {
  cfg.validate();
  const JointSample sample = load_sample(cfg);
  classify_case(sample);
  const MleFit fit = fit_mle(sample);
  const auto posts = run_posteriors(sample, cfg);

  Table pts{"predictions", {"j", "method", "prior", "loss", "value", "note"}};
  Table ints{"prediction_intervals", {"j", "method", "prior", "lower", "upper", "length"}};
  json checks = json::array();
  auto check = [&](int j, const std::string& what, const Interval& iv, double v) {
    const bool ok = iv.contains(v);
    checks.push_back(json{{"j", j}, {"check", what}, {"ok", ok}});
    if (!ok) std::cerr << "warning: j=" << j << " " << what << " does not contain its point prediction\n";
  };
  for (int j : cfg.js) {
    const PredictionTarget target{j};
    const auto plug = PredictiveMixture::plug_in(sample, target, fit.theta);
    const double b = plug.point({Loss::se()})[0];
    pts.add({j, "BUP", "", "se", b, ""});
    const Interval cpi = plug.equal_tail(cfg.level).interval;
    ints.add({j, "classical", "", cpi.lower, cpi.upper, cpi.length()});
    check(j, "classical interval contains BUP", cpi, b);
    for (const auto& p : posts) {
      const auto mix = PredictiveMixture::posterior(sample, target, p.draws);
      const Interval cri = mix.equal_tail(cfg.level).interval;
      const PredictionInterval hpd = mix.hpd(cfg.level);
      ints.add({j, "CrI", p.prior, cri.lower, cri.upper, cri.length()});
      ints.add({j, hpd.multimodal ? "HPD(equal-tail fallback)" : "HPD", p.prior, hpd.interval.lower,
                hpd.interval.upper, hpd.interval.length()});
      // A draw whose conditional moment diverges makes the whole mixture
      // moment infinite; such predictors are reported as NA.
      for (const auto& loss : cfg.losses) {
        try {
          const double v = mix.point({loss})[0];
          pts.add({j, "Bayes", p.prior, loss.label(), v, ""});
          if (loss.kind == LossKind::SquaredError) check(j, p.prior + " CrI contains SE prediction", cri, v);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::NumericalFailure) throw;
          std::cerr << "warning: j=" << j << " " << p.prior << " " << loss.label() << ": " << e.what() << '\n';
          pts.add({j, "Bayes", p.prior, loss.label(), nullptr, e.what()});
        }
      }
    }
  }
  json extra = json{{"checks", checks}, {"w_r", sample.w_r()}, {"case", to_string(classify_case(sample))}};
  for (const auto& path : emit(cfg.out, cfg.format, {pts, ints}, cfg.to_json(), extra)) log << path << '\n';
  return kOk;
}

// ---------------------------------------------------------------- study

inline json study_config_json(const StudyConfig& c) {
  json designs = json::array();
  for (const auto& d : c.designs) designs.push_back(json::array({d.m, d.n, d.r}));
  return json{{"theta_true", theta_json(c.theta_true)},
              {"designs", designs},
              {"n_s", c.n_s},
              {"D", c.draws},
              {"priors", priors_json(c.informative)},
              {"gamma", c.gamma},
              {"bayes", c.bayes},
              {"losses", losses_json(c.losses)},
              {"shrink", json{{"w", c.shrink.w}, {"theta0", theta_json(c.shrink.theta0)}, {"alpha", c.shrink.alpha}}},
              {"level", c.level},
              {"seed", c.seed},
              {"parallelism", c.parallelism},
              {"predict_j", c.predict_j}};
}

inline StudyConfig study_config_from_json(const json& j) {
  require(j.is_object(), ErrorKind::Config, "study config root must be an object");
  StudyConfig c;
  try {
    if (j.contains("theta_true")) c.theta_true = theta_from_json(j["theta_true"], "theta_true");
    if (j.contains("designs")) {
      c.designs.clear();
      for (const auto& d : j["designs"]) {
        require(d.is_array() && d.size() == 3, ErrorKind::Config, "each design must be [m, n, r]");
        c.designs.push_back({d[0].get<int>(), d[1].get<int>(), d[2].get<int>()});
      }
    }
    if (j.contains("n_s")) c.n_s = j["n_s"].get<int>();
    if (j.contains("D")) c.draws = j["D"].get<std::size_t>();
    if (j.contains("priors")) c.informative = priors_from_json(j["priors"]);
    if (j.contains("gamma")) c.gamma = j["gamma"].get<double>();
    if (j.contains("bayes")) c.bayes = j["bayes"].get<bool>();
    if (j.contains("losses")) c.losses = losses_from_json(j["losses"]);
    if (j.contains("shrink")) {
      const auto& s = j["shrink"];
      if (s.contains("w")) c.shrink.w = s["w"].get<double>();
      if (s.contains("alpha")) c.shrink.alpha = s["alpha"].get<double>();
      if (s.contains("theta0")) c.shrink.theta0 = theta_from_json(s["theta0"], "shrink.theta0");
    }
    if (j.contains("level")) c.level = j["level"].get<double>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("parallelism")) c.parallelism = j["parallelism"].get<int>();
    if (j.contains("predict_j")) c.predict_j = j["predict_j"].get<std::vector<int>>();
  } catch (const json::exception& e) {
    fail(ErrorKind::Config, std::string("bad study config value: ") + e.what());
  }
  return c;
}

inline std::vector<Table> study_tables(const StudyResult& res) {
  auto family = [](const std::string& label) -> std::string {
    if (label == "EM") return "em";
    if (label.rfind("LS[", 0) == 0) return "ls";
    if (label.rfind("SP[", 0) == 0) return "sp";
    if (label.rfind("IN-", 0) == 0) return "bayes_in";
    return "bayes_nin";
  };
  std::vector<std::string> cols{"design", "estimator", "loss", "replications"};
  for (const char* stat : {"bias", "bias_se", "mse", "rmse", "re"})
    for (int i = 1; i <= 4; ++i) cols.push_back(std::string(stat) + std::to_string(i));
  std::vector<Table> tables;
  for (const std::string fam : {"em", "bayes_in", "bayes_nin", "ls", "sp"}) {
    Table t{"estimates_" + fam, cols};
    for (const auto& m : res.metrics) {
      if (family(m.estimator) != fam) continue;
      std::vector<json> row{m.design, m.estimator, m.loss, m.replications};
      for (const auto* arr : {&m.bias, &m.bias_se, &m.mse, &m.rmse, &m.re})
        for (double v : *arr) row.push_back(num(v));
      t.add(row);
    }
    if (!t.rows.empty()) tables.push_back(t);
  }
  std::vector<std::string> icols{"design", "interval", "replications"};
  for (const char* stat : {"lower", "upper", "length", "coverage"})
    for (int i = 1; i <= 4; ++i) icols.push_back(std::string(stat) + std::to_string(i));
  Table it{"intervals", icols};
  for (const auto& r : res.interval_rows) {
    std::vector<json> row{r.design, r.interval, r.replications};
    for (const auto* arr : {&r.lower, &r.upper, &r.length, &r.coverage})
      for (double v : *arr) row.push_back(num(v));
    it.add(row);
  }
  tables.push_back(it);
  Table pt{"predictions", {"design", "j", "predictor", "replications", "bias", "mse"}};
  for (const auto& r : res.prediction_rows) pt.add({r.design, r.j, r.predictor, r.replications, num(r.bias), num(r.mse)});
  if (!pt.rows.empty()) tables.push_back(pt);
  Table pit{"prediction_intervals", {"design", "j", "interval", "replications", "lower", "upper", "length", "coverage"}};
  for (const auto& r : res.prediction_interval_rows)
    pit.add({r.design, r.j, r.interval, r.replications, num(r.lower), num(r.upper), num(r.length), num(r.coverage)});
  if (!pit.rows.empty()) tables.push_back(pit);
  return tables;
}

inline json study_summary(const StudyResult& res, double seconds) {
  json designs = json::array();
  for (const auto& d : res.designs) {
    json reasons = json::object();
    for (const auto& [k, v] : d.failure_reasons) reasons[k] = v;
    designs.push_back(json{{"design", d.design.label()},
                           {"attempted", d.attempted},
                           {"failed", d.failed},
                           {"failure_reasons", reasons},
                           {"prediction_failures", d.prediction_failures},
                           {"degenerate_weights", d.degenerate_weights},
                           {"sp_membership_violations", d.sp_membership_violations}});
  }
  return json{{"designs", designs}, {"total_failures", res.total_failures()}, {"seconds", seconds}};
}

inline int cmd_study(const StudyConfig& cfg, const std::string& out_dir, const std::string& format,
                     std::ostream& log = std::cout) {
  require(format == "csv" || format == "json", ErrorKind::Config, "--format must be csv or json");
  const auto t0 = std::chrono::steady_clock::now();
  const StudyResult res = run_study(cfg);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const json cj = study_config_json(cfg);
  for (const auto& path : emit(out_dir, format, study_tables(res), cj, json{{"summary", study_summary(res, seconds)}}))
    log << path << '\n';
  if (res.total_failures() > 0) {
    std::cerr << "warning: " << res.total_failures() << " replications failed and were excluded\n";
    return kPartialStudy;
  }
  return kOk;
}

// ---------------------------------------------------------------- simulate

inline int cmd_simulate(const ThetaVector& theta, int m, int n, std::optional<int> r, std::uint64_t seed,
                        const std::string& out_path, std::ostream& log = std::cout) {
  validate(theta);
  Rng rng = make_stream(seed, 0);
  const int rr = r.value_or(m + n);
  const JointSample s = generate_joint_sample(theta, m, n, rr, rng);
  const json cfg{{"command", "simulate"}, {"theta", theta_json(theta)}, {"m", m}, {"n", n}, {"r", rr}, {"seed", seed}};
  const std::vector<std::string> comments{"config: " + cfg.dump()};
  if (out_path.empty() || out_path == "-") {
    io::write_sample_csv(log, s, comments);
  } else {
    const auto parent = std::filesystem::path(out_path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(out_path);
    require(out.good(), ErrorKind::Io, "cannot write " + out_path);
    io::write_sample_csv(out, s, comments);
  }
  return kOk;
}

// ---------------------------------------------------------------- entry

inline int run(int argc, char** argv) {
  CLI::App app{"Inference for two Burr-XII populations under joint type-II censoring"};
  app.require_subcommand(1);

  struct Flags {
    std::string config, data, x, y, out, format;
    std::optional<int> m, n, r;
    std::optional<std::uint64_t> seed;
    std::optional<double> level, gamma, w, alpha;
    std::optional<std::size_t> draws;
    std::string prior, theta0;
    std::vector<std::string> losses;
    std::vector<int> js;
  } f;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "JSON config file; flags override its values");
    sub->add_option("--data", f.data, "joint sample CSV with header w,s");
    sub->add_option("--m", f.m, "number of X units");
    sub->add_option("--n", f.n, "number of Y units");
    sub->add_option("--r", f.r, "use only the first r failures");
    sub->add_option("--seed", f.seed, "root random seed");
    sub->add_option("--level", f.level, "interval level, e.g. 0.95");
    sub->add_option("--D", f.draws, "importance-sampling draws");
    sub->add_option("--gamma", f.gamma, "exponent of the quasi prior");
    sub->add_option("--prior", f.prior, "informative hyperparameters a1,b1,c1,d1,a2,b2,c2,d2");
    sub->add_option("--loss", f.losses, "loss: se, linex:v=<v>, ge:k=<k> (repeatable)");
    sub->add_option("--w", f.w, "shrinkage weight");
    sub->add_option("--theta0", f.theta0, "prior guess t1,t2,t3,t4 for shrinkage");
    sub->add_option("--alpha", f.alpha, "pretest size");
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--format", f.format, "csv or json");
  };

  auto* fit = app.add_subcommand("fit", "estimate parameters (MLE, Bayes, shrinkage)");
  add_common(fit);
  fit->add_option("--x", f.x, "complete X sample for a goodness-of-fit table");
  fit->add_option("--y", f.y, "complete Y sample for a goodness-of-fit table");

  auto* predict = app.add_subcommand("predict", "predict W_{r+j} for the censored units");
  add_common(predict);
  predict->add_option("--j", f.js, "steps ahead (repeatable)");

  auto* study = app.add_subcommand("study", "run the Monte Carlo study");
  std::string study_config, study_out = "study_out", study_format = "csv";
  std::optional<int> ns, threads;
  std::optional<std::uint64_t> study_seed;
  std::optional<std::size_t> study_draws;
  study->add_option("--config", study_config, "study config JSON")->required();
  study->add_option("--ns", ns, "replications per design");
  study->add_option("--D", study_draws, "importance-sampling draws");
  study->add_option("--seed", study_seed, "root random seed");
  study->add_option("--threads", threads, "worker threads");
  study->add_option("--out", study_out, "output directory");
  study->add_option("--format", study_format, "csv or json");

  auto* simulate = app.add_subcommand("simulate", "draw a joint type-II censored sample");
  std::string sim_theta = "1.5,1,2,0.5", sim_out;
  int sim_m = 20, sim_n = 20;
  std::optional<int> sim_r;
  std::uint64_t sim_seed = 1;
  simulate->add_option("--theta", sim_theta, "t1,t2,t3,t4");
  simulate->add_option("--m", sim_m, "number of X units");
  simulate->add_option("--n", sim_n, "number of Y units");
  simulate->add_option("--r", sim_r, "number of observed failures (default m+n)");
  simulate->add_option("--seed", sim_seed, "random seed");
  simulate->add_option("--out", sim_out, "output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*study) {
      StudyConfig cfg = study_config_from_json(load_json_file(study_config));
      if (ns) cfg.n_s = *ns;
      if (study_draws) cfg.draws = *study_draws;
      if (study_seed) cfg.seed = *study_seed;
      if (threads) cfg.parallelism = *threads;
      return cmd_study(cfg, study_out, study_format);
    }
    if (*simulate) {
      return cmd_simulate(parse_theta(sim_theta, "--theta"), sim_m, sim_n, sim_r, sim_seed, sim_out);
    }
    AnalysisConfig cfg;
    if (!f.config.empty()) cfg.apply_json(load_json_file(f.config));
    if (!f.data.empty()) cfg.data = f.data;
    if (!f.x.empty()) cfg.x_data = f.x;
    if (!f.y.empty()) cfg.y_data = f.y;
    if (f.m) cfg.m = f.m;
    if (f.n) cfg.n = f.n;
    if (f.r) cfg.r = f.r;
    if (f.seed) cfg.seed = *f.seed;
    if (f.level) cfg.level = *f.level;
    if (f.draws) cfg.draws = *f.draws;
    if (f.gamma) cfg.gamma = *f.gamma;
    if (!f.prior.empty()) cfg.informative = parse_priors(f.prior);
    if (!f.losses.empty()) {
      cfg.losses.clear();
      for (const auto& l : f.losses) cfg.losses.push_back(parse_loss(l));
    }
    if (f.w) cfg.w = *f.w;
    if (!f.theta0.empty()) cfg.theta0 = parse_theta(f.theta0, "--theta0");
    if (f.alpha) cfg.alpha = *f.alpha;
    if (!f.js.empty()) cfg.js = f.js;
    if (!f.out.empty()) cfg.out = f.out;
    if (!f.format.empty()) cfg.format = f.format;
    return *fit ? cmd_fit(cfg) : cmd_predict(cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.is_input_error() ? kInputError : kNumericalFailure;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumericalFailure;
  }
}

}  // namespace burrjoint::cli
