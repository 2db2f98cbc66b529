#include "lab.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>

#include <CLI11.hpp>

#include "gpslab/hash.hpp"
#include "gpslab/homodyne.hpp"
#include "gpslab/tomography.hpp"

namespace gpslab::cli {

namespace fs = std::filesystem;

namespace {

// ------------------------------------------------------------------ logging

void emit(std::ostream& log, const char* level, const char* event, Json fields = Json::object()) {
  Json line{{"level", level}, {"event", event}};
  for (auto& [k, v] : fields.items()) line[k] = v;
  log << line.dump() << '\n';
  log.flush();
}

// ------------------------------------------------------------------- config

[[noreturn]] void fail(const std::string& field, const std::string& what) { throw ContractError(field + ": " + what); }

void reject_unknown(const Json& doc, const std::string& section, std::initializer_list<const char*> keys) {
  if (!doc.is_object()) fail(section, "expected a JSON object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : doc.items()) {
    if (!allowed.contains(k)) fail(section.empty() ? k : section + "." + k, "unknown key");
  }
}

double get_number(const Json& doc, const char* key, double fallback, const std::string& section) {
  const auto it = doc.find(key);
  if (it == doc.end()) return fallback;
  if (!it->is_number() || !std::isfinite(it->get<double>())) fail(section + "." + key, "expected a finite number");
  return it->get<double>();
}

int get_int(const Json& doc, const char* key, int fallback, const std::string& section) {
  const auto it = doc.find(key);
  if (it == doc.end()) return fallback;
  if (!it->is_number_integer()) fail(section + "." + key, "expected an integer");
  return it->get<int>();
}

std::vector<double> get_numbers(const Json& doc, const char* key, std::vector<double> fallback,
                                const std::string& section) {
  const auto it = doc.find(key);
  if (it == doc.end()) return fallback;
  if (!it->is_array() || it->empty()) fail(section + "." + key, "expected a non-empty array of numbers");
  std::vector<double> out;
  for (const Json& v : *it) {
    if (!v.is_number() || !std::isfinite(v.get<double>())) fail(section + "." + key, "expected numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

Axis get_axis(const Json& doc, const char* key, Axis fallback, const std::string& section) {
  const auto it = doc.find(key);
  if (it == doc.end()) return fallback;
  const std::string name = section + "." + key;
  reject_unknown(*it, name, {"min", "max", "n"});
  Axis a{get_number(*it, "min", fallback.min, name), get_number(*it, "max", fallback.max, name),
         get_int(*it, "n", fallback.n, name)};
  if (a.n < 2 || !(a.max > a.min)) fail(name, "needs n >= 2 and max > min");
  return a;
}

Json axis_json(const Axis& a) { return Json{{"min", a.min}, {"max", a.max}, {"n", a.n}}; }

// ---------------------------------------------------------------- artifacts

struct Artifact {
  std::string name;
  std::string content;
};

class Run {
 public:
  Run(const Options& opts, const LabConfig& cfg, std::ostream& log)
      : opts_(opts), cfg_(cfg), log_(log), start_(std::chrono::steady_clock::now()) {}

  void add(std::string name, std::string content) { artifacts_.push_back({std::move(name), std::move(content)}); }

  // Refuses to clobber existing files unless --force; writes artifacts, then
  // the manifest, then re-hashes everything listed.
  int commit() {
    const std::string manifest_name = "manifest_" + opts_.command + ".json";
    std::vector<std::string> names;
    for (const Artifact& a : artifacts_) names.push_back(a.name);
    names.push_back(manifest_name);
    if (!opts_.force) {
      for (const std::string& n : names) {
        if (fs::exists(opts_.out / n)) {
          emit(log_, "error", "output_collision", {{"path", (opts_.out / n).string()}, {"hint", "pass --force"}});
          return kInputContract;
        }
      }
    }
    fs::create_directories(opts_.out);
    Json listed = Json::array();
    for (const Artifact& a : artifacts_) {
      write_text(opts_.out / a.name, a.content);
      listed.push_back({{"path", a.name}, {"sha256", sha256_hex(a.content)}, {"bytes", a.content.size()}});
    }
    for (const Json& entry : listed) {
      if (sha256_file(opts_.out / entry["path"].get<std::string>()) != entry["sha256"].get<std::string>()) {
        emit(log_, "error", "artifact_hash_mismatch", {{"path", entry["path"]}});
        return kNumericalFailure;
      }
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    Json manifest{{"command", opts_.command},
                  {"config_path", opts_.config ? Json(opts_.config->string()) : Json(nullptr)},
                  {"overrides", opts_.overrides},
                  {"seed", opts_.seed},
                  {"output_dir", opts_.out.string()},
                  {"artifacts", std::move(listed)},
                  {"config", to_json(cfg_)},
                  {"wall_time_s", wall}};
    write_text(opts_.out / manifest_name, manifest.dump(2) + "\n");
    emit(log_, "info", "run_complete",
         {{"command", opts_.command}, {"artifacts", artifacts_.size()}, {"wall_time_s", wall}});
    return kOk;
  }

 private:
  const Options& opts_;
  const LabConfig& cfg_;
  std::ostream& log_;
  std::chrono::steady_clock::time_point start_;
  std::vector<Artifact> artifacts_;
};

std::string phase_tag(double theta_deg) {
  char buf[32];
  if (theta_deg == std::floor(theta_deg) && theta_deg >= 0 && theta_deg < 1000) {
    std::snprintf(buf, sizeof buf, "%03d", static_cast<int>(theta_deg));
  } else {
    std::snprintf(buf, sizeof buf, "%s", format_double(theta_deg).c_str());
  }
  return buf;
}

Json negativity_json(const NegativityMetrics& m, double cut_deg) {
  return Json{{"min_value", m.min_value},
              {"negative_volume", m.negative_volume},
              {"dip_count", m.dip_count},
              {"cut_deg", cut_deg},
              {"dip_threshold", kDipThreshold}};
}

void check_physical(const DensityOperator& rho, const char* what) {
  if (const auto problem = validate(rho)) throw NumericalError(std::string(what) + ": " + *problem);
}

fs::path input_or(const Options& opts, std::size_t index, const char* fallback) {
  return index < opts.inputs.size() ? opts.inputs[index] : opts.out / fallback;
}

DensityOperator load_state(const fs::path& path) {
  const DensityOperator rho = density_from_json(read_json(path));
  if (const auto problem = validate(rho)) throw ContractError(path.string() + ": " + *problem);
  return rho;
}

// ---------------------------------------------------------------- commands

int cmd_simulate(const Options& opts, const LabConfig& cfg, std::ostream& log) {
  Run run(opts, cfg, log);
  const HeraldedState h = herald(cfg, log);
  Json state = to_json(h);
  state["meta"]["herald_model"] = to_string(cfg.herald_model);
  state["meta"]["herald_n"] = cfg.gps.herald_n;
  run.add("state.json", state.dump(2) + "\n");

  const WignerGrid w = wigner(h.state, cfg.output.wigner);
  if (w.span_warning) emit(log, "warn", "wigner_span_small", {{"note", "normalisation check unreliable"}});
  run.add("wigner.csv", wigner_csv(w));
  run.add("wigner.json", to_json(w).dump() + "\n");
  for (double theta : cfg.homodyne.phases_deg) {
    run.add("marginal_" + phase_tag(theta) + ".csv", marginal_csv(marginal(h.state, theta, cfg.output.marginal_axis)));
  }
  run.add("negativity.json", negativity_json(negativity_metrics(w, cfg.output.cut_deg), cfg.output.cut_deg).dump(2) + "\n");

  Json fit = to_json(*h.s0_fit);
  fit["n"] = cfg.gps.herald_n;
  fit["herald_model"] = to_string(cfg.herald_model);
  fit["reflectivity"] = cfg.gps.reflectivity;
  fit["target"] = "Psi_{n,s0}(lambda x) ~ phi_0(lambda x)^s0 phi_n(lambda x)";
  run.add("s0_fit.json", fit.dump(2) + "\n");
  return run.commit();
}

int cmd_sample(const Options& opts, const LabConfig& cfg, std::ostream& log) {
  Run run(opts, cfg, log);
  const fs::path src = input_or(opts, 0, "state.json");
  const DensityOperator rho = load_state(src);
  const HomodyneSection& hd = cfg.homodyne;
  HomodyneDataset data = sample(rho, hd.phases_deg, hd.samples_per_phase, hd.eta_hd, opts.seed);
  emit(log, "info", "sampled", {{"input", src.string()}, {"records", data.records.size()}, {"seed", opts.seed}});
  run.add("dataset.csv", dataset_csv(data));
  return run.commit();
}

int cmd_reconstruct(const Options& opts, const LabConfig& cfg, std::ostream& log) {
  Run run(opts, cfg, log);
  const fs::path src = input_or(opts, 0, "dataset.csv");
  const HomodyneDataset data = parse_dataset_csv(read_text(src));
  if (data.records.empty()) throw ContractError("records: dataset " + src.string() + " is empty");
  const TomographySection& t = cfg.tomography;
  const std::vector<double> edges = uniform_edges(-t.bin_range, t.bin_range, t.bins);
  const BinnedData binned = bin(data, edges);
  const PovmSet povm = build_povm(binned.phases_deg, edges, t.dim, t.eta);
  const MleResult result = mle_reconstruct(binned, povm, {t.max_iter, t.tol, t.dim});
  check_physical(result.rho, "reconstructed state");
  for (std::size_t i = 1; i < result.loglik_trace.size(); ++i) {
    if (result.loglik_trace[i] < result.loglik_trace[i - 1] - 1e-9) {
      throw NumericalError("log-likelihood decreased at iteration " + std::to_string(i));
    }
  }
  emit(log, result.converged ? "info" : "warn", "mle_finished",
       {{"iterations", result.iterations},
        {"converged", result.converged},
        {"diluted_steps", result.diluted_steps},
        {"loglik", result.loglik_trace.back()}});
  run.add("mle.json", to_json(result).dump(2) + "\n");
  return run.commit();
}

int cmd_analyze(const Options& opts, const LabConfig& cfg, std::ostream& log) {
  Run run(opts, cfg, log);
  const fs::path src = input_or(opts, 0, "mle.json");
  const DensityOperator rho = load_state(src);
  const int n = cfg.gps.herald_n;

  Json fit = nullptr;
  Json target = nullptr;
  try {
    const S0Fit f = extract_s0(rho, n);
    if (f.model_mismatch) emit(log, "warn", "model_mismatch", {{"fidelity", f.fidelity}});
    fit = to_json(f);
    target = Json{{"n", n}, {"s0", f.s0}, {"fidelity", fidelity(analytic_target(n, f.s0, rho.dim()), rho)}};
  } catch (const std::invalid_argument& e) {
    emit(log, "warn", "s0_fit_skipped", {{"reason", e.what()}});
  }

  const WignerGrid w = wigner(rho, cfg.output.wigner);
  const NegativityMetrics neg = negativity_metrics(w, cfg.output.cut_deg);

  std::string table = "theta_deg,contrast,variance\n";
  Json contrast = Json::array();
  for (double theta : cfg.homodyne.phases_deg) {
    const double c = fringe_contrast(rho, theta, cfg.output.marginal_axis);
    const double var = marginal(rho, theta, cfg.output.marginal_axis).variance();
    table += format_double(theta) + "," + format_double(c) + "," + format_double(var) + "\n";
    contrast.push_back({{"theta_deg", theta}, {"contrast", c}, {"variance", var}});
  }
  Json report{{"input", src.string()},
              {"dim", rho.dim()},
              {"purity", (rho.mat() * rho.mat()).trace().real()},
              {"mean_photon_number", rho.mean_photon_number()},
              {"s0_fit", std::move(fit)},
              {"analytic_target", std::move(target)},
              {"negativity", negativity_json(neg, cfg.output.cut_deg)},
              {"contrast", std::move(contrast)},
              {"contrast_definition", "total-variation distance of p(x;theta) from the phase-averaged marginal"}};
  run.add("analysis.json", report.dump(2) + "\n");
  run.add("contrast.csv", table);
  return run.commit();
}

int cmd_sweep(const Options& opts, const LabConfig& cfg, std::ostream& log) {
  Run run(opts, cfg, log);
  std::vector<double> rs = opts.reflectivities.empty() ? cfg.sweep_reflectivities : opts.reflectivities;
  for (double r : rs) {
    if (!(r > 0.0 && r < 1.0)) fail("reflectivities", "every R must lie in (0, 1), got " + format_double(r));
  }
  std::sort(rs.begin(), rs.end());
  std::string table = "R,s0,herald_prob,event_rate_cps,min_wigner,dip_count,status\n";
  for (double r : rs) {
    LabConfig point = cfg;
    point.gps.reflectivity = r;
    try {
      const HeraldedState h = herald(point, log);
      const NegativityMetrics m = negativity_metrics(wigner(h.state, cfg.output.wigner), cfg.output.cut_deg);
      table += format_double(r) + "," + format_double(h.s0_fit->s0) + "," + format_double(h.herald_prob) + "," +
               format_double(h.event_rate_cps) + "," + format_double(m.min_value) + "," +
               std::to_string(m.dip_count) + "," + (h.s0_fit->model_mismatch ? "model_mismatch" : "ok") + "\n";
    } catch (const UnheraldableError& e) {
      emit(log, "warn", "sweep_point_unheraldable", {{"R", r}, {"reason", e.what()}});
      table += format_double(r) + ",,,,,,unheraldable\n";
    }
  }
  run.add("sweep.csv", table);
  return run.commit();
}

}  // namespace

// ------------------------------------------------------------------ config

Json to_json(const LabConfig& cfg) {
  const TomographySection& t = cfg.tomography;
  return Json{{"herald_model", to_string(cfg.herald_model)},
              {"gps", to_json(cfg.gps)},
              {"homodyne",
               {{"phases_deg", cfg.homodyne.phases_deg},
                {"samples_per_phase", cfg.homodyne.samples_per_phase},
                {"eta_hd", cfg.homodyne.eta_hd}}},
              {"tomography",
               {{"dim", t.dim}, {"max_iter", t.max_iter}, {"tol", t.tol}, {"eta", t.eta}, {"bins", t.bins},
                {"bin_range", t.bin_range}}},
              {"output",
               {{"wigner", {{"x", axis_json(cfg.output.wigner.x)}, {"p", axis_json(cfg.output.wigner.p)}}},
                {"marginal_axis", axis_json(cfg.output.marginal_axis)},
                {"cut_deg", cfg.output.cut_deg}}},
              {"sweep", {{"reflectivities", cfg.sweep_reflectivities}}}};
}

LabConfig lab_config_from_json(const Json& doc) {
  reject_unknown(doc, "", {"herald_model", "gps", "homodyne", "tomography", "output", "sweep"});
  LabConfig cfg;
  if (const auto it = doc.find("herald_model"); it != doc.end()) {
    if (!it->is_string()) fail("herald_model", "expected \"ideal\" or \"realistic\"");
    try {
      cfg.herald_model = parse_herald_model(it->get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ContractError(e.what());
    }
  }
  if (const auto it = doc.find("gps"); it != doc.end()) {
    try {
      cfg.gps = gps_config_from_json(*it);
    } catch (const ContractError& e) {
      throw ContractError(std::string("gps.") + e.what());
    }
  }
  if (const auto it = doc.find("homodyne"); it != doc.end()) {
    reject_unknown(*it, "homodyne", {"phases_deg", "samples_per_phase", "eta_hd"});
    HomodyneSection& h = cfg.homodyne;
    h.phases_deg = get_numbers(*it, "phases_deg", h.phases_deg, "homodyne");
    h.samples_per_phase = get_int(*it, "samples_per_phase", h.samples_per_phase, "homodyne");
    h.eta_hd = get_number(*it, "eta_hd", h.eta_hd, "homodyne");
    if (h.samples_per_phase < 1) fail("homodyne.samples_per_phase", "must be >= 1");
    if (h.eta_hd < 0.0 || h.eta_hd > 1.0) fail("homodyne.eta_hd", "must lie in [0, 1]");
  }
  if (const auto it = doc.find("tomography"); it != doc.end()) {
    reject_unknown(*it, "tomography", {"dim", "max_iter", "tol", "eta", "bins", "bin_range"});
    TomographySection& t = cfg.tomography;
    t.dim = get_int(*it, "dim", t.dim, "tomography");
    t.max_iter = get_int(*it, "max_iter", t.max_iter, "tomography");
    t.tol = get_number(*it, "tol", t.tol, "tomography");
    t.eta = get_number(*it, "eta", t.eta, "tomography");
    t.bins = get_int(*it, "bins", t.bins, "tomography");
    t.bin_range = get_number(*it, "bin_range", t.bin_range, "tomography");
    if (t.dim < 1 || t.dim > 100) fail("tomography.dim", "must lie in [1, 100]");
    if (t.max_iter < 1) fail("tomography.max_iter", "must be >= 1");
    if (!(t.tol > 0.0)) fail("tomography.tol", "must be > 0");
    if (t.eta < 0.0 || t.eta > 1.0) fail("tomography.eta", "must lie in [0, 1]");
    if (t.bins < 1) fail("tomography.bins", "must be >= 1");
    if (!(t.bin_range > 0.0)) fail("tomography.bin_range", "must be > 0");
  }
  if (const auto it = doc.find("output"); it != doc.end()) {
    reject_unknown(*it, "output", {"wigner", "marginal_axis", "cut_deg"});
    OutputSection& o = cfg.output;
    if (const auto w = it->find("wigner"); w != it->end()) {
      reject_unknown(*w, "output.wigner", {"x", "p"});
      o.wigner.x = get_axis(*w, "x", o.wigner.x, "output.wigner");
      o.wigner.p = get_axis(*w, "p", o.wigner.p, "output.wigner");
    }
    o.marginal_axis = get_axis(*it, "marginal_axis", o.marginal_axis, "output");
    o.cut_deg = get_number(*it, "cut_deg", o.cut_deg, "output");
  }
  if (const auto it = doc.find("sweep"); it != doc.end()) {
    reject_unknown(*it, "sweep", {"reflectivities"});
    cfg.sweep_reflectivities = get_numbers(*it, "reflectivities", cfg.sweep_reflectivities, "sweep");
  }
  return cfg;
}

void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) fail("--set", "expected key=value, got '" + assignment + "'");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const Json::parse_error&) {
    value = text;
  }
  Json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) fail("--set", "empty path segment in '" + path + "'");
    if (!node->is_object()) fail(path, "cannot descend into a non-object");
    if (dot == std::string::npos) {
      (*node)[key] = std::move(value);
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = Json::object();
    start = dot + 1;
  }
}

HeraldedState herald(const LabConfig& cfg, std::ostream& log) {
  const TwoModeInput input = build_input(cfg.gps);
  if (input.truncation.warning) {
    emit(log, "warn", "truncation_leakage", {{"captured", input.truncation.captured}, {"dim", cfg.gps.dim}});
  }
  HeraldedState h = [&]() -> HeraldedState {
    if (cfg.herald_model == HeraldModel::kRealistic) return herald_realistic(cfg.gps, input.state, cfg.gps.herald_n);
    const PureHerald p = herald_ideal(input.state, cfg.gps.herald_n);
    return {DensityOperator::pure(p.state), p.probability, p.probability * cfg.gps.mode_rate_hz, std::nullopt};
  }();
  check_physical(h.state, "heralded state");
  h.s0_fit = extract_s0(h.state, cfg.gps.herald_n);
  if (h.s0_fit->model_mismatch) {
    emit(log, "warn", "model_mismatch", {{"R", cfg.gps.reflectivity}, {"fidelity", h.s0_fit->fidelity}});
  }
  emit(log, "info", "heralded",
       {{"R", cfg.gps.reflectivity},
        {"model", to_string(cfg.herald_model)},
        {"herald_prob", h.herald_prob},
        {"event_rate_cps", h.event_rate_cps},
        {"s0", h.s0_fit->s0}});
  return h;
}

int execute(const Options& opts, std::ostream& out, std::ostream& log) {
  try {
    Json doc = opts.config ? read_json(*opts.config) : Json::object();
    for (const std::string& s : opts.overrides) apply_override(doc, s);
    const LabConfig cfg = lab_config_from_json(doc);
    int code = kOk;
    if (opts.command == "simulate") {
      code = cmd_simulate(opts, cfg, log);
    } else if (opts.command == "sample") {
      code = cmd_sample(opts, cfg, log);
    } else if (opts.command == "reconstruct") {
      code = cmd_reconstruct(opts, cfg, log);
    } else if (opts.command == "analyze") {
      code = cmd_analyze(opts, cfg, log);
    } else if (opts.command == "sweep") {
      code = cmd_sweep(opts, cfg, log);
    } else {
      fail("command", "unknown command '" + opts.command + "'");
    }
    if (code == kOk) out << (opts.out / ("manifest_" + opts.command + ".json")).string() << '\n';
    return code;
  } catch (const UnheraldableError& e) {
    emit(log, "error", "unheraldable", {{"message", e.what()}});
    return kUnheraldable;
  } catch (const NumericalError& e) {
    emit(log, "error", "numerical_failure", {{"message", e.what()}});
    return kNumericalFailure;
  } catch (const std::invalid_argument& e) {
    emit(log, "error", "input_contract", {{"message", e.what()}});
    return kInputContract;
  } catch (const std::domain_error& e) {
    emit(log, "error", "input_contract", {{"message", e.what()}});
    return kInputContract;
  } catch (const std::exception& e) {
    emit(log, "error", "numerical_failure", {{"message", e.what()}});
    return kNumericalFailure;
  }
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& log) {
  CLI::App app{"gpslab: generalized photon subtraction laboratory"};
  app.require_subcommand(1);
  Options opts;
  std::string config;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "JSON config with gps/homodyne/tomography/output sections");
    sub->add_option("--seed", opts.seed, "64-bit RNG seed");
    sub->add_option("--out", opts.out, "output directory");
    sub->add_option("--set", opts.overrides, "override a config value, e.g. gps.reflectivity=0.3")->take_all();
    sub->add_flag("--force", opts.force, "overwrite existing artifacts");
  };
  CLI::App* simulate = app.add_subcommand("simulate", "herald a state and export phase-space data");
  CLI::App* sample_cmd = app.add_subcommand("sample", "draw homodyne samples from a state JSON");
  CLI::App* reconstruct = app.add_subcommand("reconstruct", "maximum-likelihood tomography of a dataset CSV");
  CLI::App* analyze = app.add_subcommand("analyze", "negativity, fit and fringe contrast of a state JSON");
  CLI::App* sweep = app.add_subcommand("sweep", "tabulate s0, rates and negativity across reflectivities");
  for (CLI::App* sub : {simulate, sample_cmd, reconstruct, analyze, sweep}) common(sub);
  sample_cmd->add_option("input", opts.inputs, "state JSON (default OUT/state.json)");
  reconstruct->add_option("input", opts.inputs, "dataset CSV (default OUT/dataset.csv)");
  analyze->add_option("input", opts.inputs, "state JSON (default OUT/mle.json)");
  sweep->add_option("--reflectivities", opts.reflectivities, "comma-separated R values")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, log);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, log);
    return kInputContract;
  }
  opts.command = app.get_subcommands().front()->get_name();
  if (!config.empty()) opts.config = config;
  return execute(opts, out, log);
}

}  // namespace gpslab::cli
