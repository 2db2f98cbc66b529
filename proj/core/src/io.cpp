#include "gpslab/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

namespace gpslab {

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ContractError(field + ": " + what);
}

const Json& field(const Json& doc, const char* key) {
  if (!doc.is_object()) fail("document", "expected a JSON object");
  const auto it = doc.find(key);
  if (it == doc.end()) fail(key, "missing");
  return *it;
}

double number(const Json& v, const std::string& name) {
  if (!v.is_number()) fail(name, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(name, "must be finite");
  return x;
}

int integer(const Json& v, const std::string& name) {
  if (!v.is_number_integer()) fail(name, "expected an integer");
  return v.get<int>();
}

std::vector<double> numbers(const Json& v, const std::string& name, std::size_t expected) {
  if (!v.is_array()) fail(name, "expected an array");
  if (v.size() != expected) fail(name, "expected " + std::to_string(expected) + " entries, got " + std::to_string(v.size()));
  std::vector<double> out;
  out.reserve(expected);
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], name + "[" + std::to_string(i) + "]"));
  return out;
}

Json axis_json(const Axis& a) { return Json{{"min", a.min}, {"max", a.max}, {"n", a.n}}; }

double parse_number(std::string_view s, const std::string& name) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) fail(name, "not a finite number: '" + std::string(s) + "'");
  return v;
}

std::string trim(std::string s) {
  const auto a = s.find_first_not_of(" \t\r");
  const auto b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("double formatting failed");
  return std::string(buf, ptr);
}

// ---------------------------------------------------------------- operators

Json to_json(const FockState& psi) {
  Json re = Json::array();
  Json im = Json::array();
  for (int k = 0; k < psi.dim(); ++k) {
    re.push_back(psi[k].real());
    im.push_back(psi[k].imag());
  }
  return Json{{"dim", psi.dim()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

Json to_json(const DensityOperator& rho) {
  Json re = Json::array();
  Json im = Json::array();
  for (int m = 0; m < rho.dim(); ++m) {
    for (int k = 0; k < rho.dim(); ++k) {
      re.push_back(rho(m, k).real());
      im.push_back(rho(m, k).imag());
    }
  }
  return Json{{"dim", rho.dim()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

FockState fock_from_json(const Json& doc) {
  const int dim = integer(field(doc, "dim"), "dim");
  if (dim < 1) fail("dim", "must be >= 1");
  const auto re = numbers(field(doc, "re"), "re", static_cast<std::size_t>(dim));
  const auto im = numbers(field(doc, "im"), "im", static_cast<std::size_t>(dim));
  CVector v(dim);
  for (int k = 0; k < dim; ++k) v[k] = {re[k], im[k]};
  return FockState(std::move(v));
}

DensityOperator density_from_json(const Json& doc) {
  const int dim = integer(field(doc, "dim"), "dim");
  if (dim < 1) fail("dim", "must be >= 1");
  const Json& re_v = field(doc, "re");
  if (re_v.is_array() && re_v.size() == static_cast<std::size_t>(dim) && dim > 1) {
    return DensityOperator::pure(fock_from_json(doc));
  }
  const std::size_t n = static_cast<std::size_t>(dim) * dim;
  const auto re = numbers(re_v, "re", n);
  const auto im = numbers(field(doc, "im"), "im", n);
  CMatrix m(dim, dim);
  for (int a = 0; a < dim; ++a) {
    for (int b = 0; b < dim; ++b) m(a, b) = {re[a * dim + b], im[a * dim + b]};
  }
  return DensityOperator(std::move(m));
}

// ------------------------------------------------------------------ config

Json to_json(const GpsConfig& cfg) {
  Json bank = Json::array();
  for (const Detector& d : cfg.detector_bank) bank.push_back({{"efficiency", d.efficiency}, {"dark_rate_cps", d.dark_rate_cps}});
  return Json{{"gain1", cfg.gain1},
              {"gain2", cfg.gain2},
              {"r1", cfg.r1()},
              {"r2", cfg.r2()},
              {"relative_phase", cfg.relative_phase_deg},
              {"reflectivity", cfg.reflectivity},
              {"herald_n", cfg.herald_n},
              {"dim", cfg.dim},
              {"idler_efficiency", cfg.idler_efficiency},
              {"detector_bank", std::move(bank)},
              {"window", cfg.window_s},
              {"mode_rate", cfg.mode_rate_hz}};
}

GpsConfig gps_config_from_json(const Json& doc) {
  if (!doc.is_object()) fail("gps", "expected a JSON object");
  static const std::set<std::string> kKeys{"gain1", "gain2", "r1", "r2", "relative_phase", "reflectivity",
                                           "herald_n", "dim", "idler_efficiency", "detector_bank", "window",
                                           "mode_rate"};
  for (const auto& [key, value] : doc.items()) {
    if (!kKeys.contains(key)) fail(key, "unknown key");
  }
  GpsConfig cfg;
  const auto opt = [&](const char* key, auto setter) {
    if (const auto it = doc.find(key); it != doc.end()) setter(*it, std::string(key));
  };
  opt("gain1", [&](const Json& v, const std::string& k) { cfg.gain1 = number(v, k); });
  opt("gain2", [&](const Json& v, const std::string& k) { cfg.gain2 = number(v, k); });
  opt("relative_phase", [&](const Json& v, const std::string& k) { cfg.relative_phase_deg = number(v, k); });
  opt("reflectivity", [&](const Json& v, const std::string& k) { cfg.reflectivity = number(v, k); });
  opt("herald_n", [&](const Json& v, const std::string& k) { cfg.herald_n = integer(v, k); });
  opt("dim", [&](const Json& v, const std::string& k) { cfg.dim = integer(v, k); });
  opt("idler_efficiency", [&](const Json& v, const std::string& k) { cfg.idler_efficiency = number(v, k); });
  opt("window", [&](const Json& v, const std::string& k) { cfg.window_s = number(v, k); });
  opt("mode_rate", [&](const Json& v, const std::string& k) { cfg.mode_rate_hz = number(v, k); });
  opt("detector_bank", [&](const Json& v, const std::string& k) {
    if (!v.is_array()) fail(k, "expected an array");
    cfg.detector_bank.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string name = k + "[" + std::to_string(i) + "]";
      if (!v[i].is_object()) fail(name, "expected {efficiency, dark_rate_cps}");
      for (const auto& [key, value] : v[i].items()) {
        if (key != "efficiency" && key != "dark_rate_cps") fail(name + "." + key, "unknown key");
      }
      cfg.detector_bank.push_back({number(field(v[i], "efficiency"), name + ".efficiency"),
                                   number(field(v[i], "dark_rate_cps"), name + ".dark_rate_cps")});
    }
  });
  // r1/r2 are derived; accepted only when consistent with the gains.
  opt("r1", [&](const Json& v, const std::string& k) {
    if (std::abs(number(v, k) - cfg.r1()) > 1e-12) fail(k, "inconsistent with gain1 (r = ln(gain)/2)");
  });
  opt("r2", [&](const Json& v, const std::string& k) {
    if (std::abs(number(v, k) - cfg.r2()) > 1e-12) fail(k, "inconsistent with gain2 (r = ln(gain)/2)");
  });
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ContractError(e.what());
  }
  return cfg;
}

Json to_json(const S0Fit& fit) {
  return Json{{"s0", fit.s0}, {"lambda", fit.lambda}, {"fidelity", fit.fidelity}, {"model_mismatch", fit.model_mismatch}};
}

Json to_json(const HeraldedState& h) {
  Json doc = to_json(h.state);
  doc["meta"] = Json{{"herald_prob", h.herald_prob},
                     {"event_rate_cps", h.event_rate_cps},
                     {"s0_fit", h.s0_fit ? to_json(*h.s0_fit) : Json(nullptr)}};
  return doc;
}

// ------------------------------------------------------------ phase space

Json to_json(const WignerGrid& w) {
  Json values = Json::array();
  for (int i = 0; i < w.values.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < w.values.cols(); ++j) row.push_back(w.values(i, j));
    values.push_back(std::move(row));
  }
  return Json{{"x_axis", axis_json(w.x_axis)},
              {"p_axis", axis_json(w.p_axis)},
              {"values", std::move(values)},
              {"normalization", "integral W dx dp = 1; vacuum W(0,0) = 1/pi; x = (a + a^dag)/sqrt(2)"},
              {"layout", "values[i][j] = W(x_i, p_j)"}};
}

std::string wigner_csv(const WignerGrid& w) {
  std::string out = "x,p,w\n";
  for (int i = 0; i < w.x_axis.n; ++i) {
    const std::string x = format_double(w.x_axis.at(i));
    for (int j = 0; j < w.p_axis.n; ++j) {
      out += x;
      out += ',';
      out += format_double(w.p_axis.at(j));
      out += ',';
      out += format_double(w.values(i, j));
      out += '\n';
    }
  }
  return out;
}

std::string marginal_csv(const MarginalDistribution& m) {
  std::string out = "# theta_deg=" + format_double(m.theta_deg) + "\nx,pdf\n";
  for (int i = 0; i < m.x_axis.n; ++i) {
    out += format_double(m.x_axis.at(i));
    out += ',';
    out += format_double(m.pdf[i]);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------- datasets

std::string dataset_csv(const HomodyneDataset& data) {
  std::string phases;
  for (std::size_t i = 0; i < data.phases_deg.size(); ++i) {
    if (i) phases += ',';
    phases += format_double(data.phases_deg[i]);
  }
  std::string out;
  out += "# seed=" + std::to_string(data.seed) + "\n";
  out += "# eta_hd=" + format_double(data.meta.eta_hd) + "\n";
  out += "# samples_per_phase=" + std::to_string(data.meta.samples_per_phase) + "\n";
  out += "# phases_deg=" + phases + "\n";
  out += "# state_hash=" + data.meta.state_hash + "\n";
  out += "# rng=" + data.meta.rng + "\n";
  out += "theta_deg,x\n";
  for (const HomodyneRecord& r : data.records) {
    out += format_double(r.theta_deg);
    out += ',';
    out += format_double(r.x);
    out += '\n';
  }
  return out;
}

HomodyneDataset parse_dataset_csv(const std::string& text) {
  HomodyneDataset data;
  std::istringstream in(text);
  std::string line;
  bool have_seed = false;
  bool have_eta = false;
  bool have_spp = false;
  bool have_phases = false;
  bool header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (header) fail("line " + std::to_string(line_no), "comment after the column header");
      const std::string body = trim(line.substr(1));
      const auto eq = body.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = trim(body.substr(0, eq));
      const std::string value = trim(body.substr(eq + 1));
      if (key == "seed") {
        std::uint64_t s = 0;
        const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), s);
        if (ec != std::errc() || ptr != value.data() + value.size()) fail("seed", "not an unsigned 64-bit integer");
        data.seed = s;
        have_seed = true;
      } else if (key == "eta_hd") {
        data.meta.eta_hd = parse_number(value, "eta_hd");
        if (data.meta.eta_hd < 0.0 || data.meta.eta_hd > 1.0) fail("eta_hd", "must lie in [0, 1]");
        have_eta = true;
      } else if (key == "samples_per_phase") {
        const double v = parse_number(value, "samples_per_phase");
        if (v < 0 || v != std::floor(v)) fail("samples_per_phase", "must be a non-negative integer");
        data.meta.samples_per_phase = static_cast<int>(v);
        have_spp = true;
      } else if (key == "phases_deg") {
        std::istringstream list(value);
        std::string item;
        while (std::getline(list, item, ',')) data.phases_deg.push_back(parse_number(trim(item), "phases_deg"));
        have_phases = true;
      } else if (key == "state_hash") {
        data.meta.state_hash = value;
      } else if (key == "rng") {
        data.meta.rng = value;
      }
      continue;
    }
    if (!header) {
      if (line != "theta_deg,x") fail("header", "expected 'theta_deg,x', got '" + line + "'");
      header = true;
      continue;
    }
    const auto comma = line.find(',');
    const std::string where = "line " + std::to_string(line_no);
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) fail(where, "expected two columns");
    const double theta = parse_number(trim(line.substr(0, comma)), where + ".theta_deg");
    const double x = parse_number(trim(line.substr(comma + 1)), where + ".x");
    data.records.push_back({theta, x});
  }
  if (!have_seed) fail("seed", "missing '# seed=' comment");
  if (!have_eta) fail("eta_hd", "missing '# eta_hd=' comment");
  if (!header) fail("header", "missing 'theta_deg,x' column header");

  if (!have_phases) {
    for (const HomodyneRecord& r : data.records) {
      if (std::find(data.phases_deg.begin(), data.phases_deg.end(), r.theta_deg) == data.phases_deg.end()) {
        data.phases_deg.push_back(r.theta_deg);
      }
    }
  }
  std::vector<int> per_phase(data.phases_deg.size(), 0);
  for (const HomodyneRecord& r : data.records) {
    const auto it = std::find_if(data.phases_deg.begin(), data.phases_deg.end(),
                                 [&](double p) { return std::abs(p - r.theta_deg) < 1e-9; });
    if (it == data.phases_deg.end()) fail("theta_deg", "record phase " + format_double(r.theta_deg) + " not in phases_deg");
    ++per_phase[static_cast<std::size_t>(it - data.phases_deg.begin())];
  }
  if (!have_spp) data.meta.samples_per_phase = per_phase.empty() ? 0 : per_phase.front();
  for (std::size_t i = 0; i < per_phase.size(); ++i) {
    if (per_phase[i] != data.meta.samples_per_phase) {
      fail("samples_per_phase", "phase " + format_double(data.phases_deg[i]) + " has " + std::to_string(per_phase[i]) +
                                    " records, expected " + std::to_string(data.meta.samples_per_phase));
    }
  }
  return data;
}

Json to_json(const MleResult& result) {
  Json doc = to_json(result.rho);
  doc["loglik_trace"] = result.loglik_trace;
  doc["iterations"] = result.iterations;
  doc["converged"] = result.converged;
  doc["diluted_steps"] = result.diluted_steps;
  return doc;
}

// ------------------------------------------------------------------- files

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ContractError(path.string() + ": cannot open");
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot write");
  out << text;
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

Json read_json(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ContractError(path.string() + ": invalid JSON (" + e.what() + ")");
  }
}

}  // namespace gpslab
