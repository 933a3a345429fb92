#include "gc/jsonio.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "gc/dsl.hpp"
#include "gc/errors.hpp"

namespace gc {

namespace {

using ojson = nlohmann::ordered_json;

void dump_value(const ojson& j, std::string& out, int indent, int depth) {
  const std::string pad = indent >= 0 ? std::string(std::size_t(indent) * (depth + 1), ' ') : "";
  const std::string close = indent >= 0 ? std::string(std::size_t(indent) * depth, ' ') : "";
  const char* nl = indent >= 0 ? "\n" : "";
  switch (j.type()) {
    case ojson::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{";
      out += nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad;
        out += ojson(it.key()).dump();
        out += indent >= 0 ? ": " : ":";
        dump_value(it.value(), out, indent, depth + 1);
      }
      out += nl;
      out += close;
      out += "}";
      return;
    }
    case ojson::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[";
      out += nl;
      bool first = true;
      for (const auto& v : j) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad;
        dump_value(v, out, indent, depth + 1);
      }
      out += nl;
      out += close;
      out += "]";
      return;
    }
    case ojson::value_t::number_float:
      out += format_double17(j.get<double>());
      return;
    default:
      out += j.dump();
      return;
  }
}

[[noreturn]] void bad(const std::string& msg) { throw ConfigError(msg); }

void check_keys(const ojson& j, const std::string& where,
                const std::set<std::string>& allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) bad(where + ": unknown key \"" + it.key() + "\"");
  }
}

const ojson& require(const ojson& j, const std::string& where, const std::string& key) {
  auto it = j.find(key);
  if (it == j.end()) bad(where + ": missing key \"" + key + "\"");
  return *it;
}

double as_double(const ojson& j, const std::string& where) {
  if (!j.is_number()) bad(where + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) bad(where + ": non-finite value");
  return v;
}

long long as_int(const ojson& j, const std::string& where) {
  if (!j.is_number_integer() && !j.is_number_unsigned())
    bad(where + ": expected an integer");
  return j.get<long long>();
}

double get_double(const ojson& j, const std::string& where, const std::string& key,
                  double dflt) {
  auto it = j.find(key);
  return it == j.end() ? dflt : as_double(*it, where + "." + key);
}

long long get_int(const ojson& j, const std::string& where, const std::string& key,
                  long long dflt) {
  auto it = j.find(key);
  return it == j.end() ? dflt : as_int(*it, where + "." + key);
}

std::string get_string(const ojson& j, const std::string& where, const std::string& key,
                       const std::string& dflt) {
  auto it = j.find(key);
  if (it == j.end()) return dflt;
  if (!it->is_string()) bad(where + "." + key + ": expected a string");
  return it->get<std::string>();
}

bool get_bool(const ojson& j, const std::string& where, const std::string& key,
              bool dflt) {
  auto it = j.find(key);
  if (it == j.end()) return dflt;
  if (!it->is_boolean()) bad(where + "." + key + ": expected a boolean");
  return it->get<bool>();
}

std::vector<double> as_double_vec(const ojson& j, const std::string& where) {
  if (!j.is_array()) bad(where + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(as_double(v, where));
  return out;
}

ModelBlock parse_model(const ojson& j) {
  check_keys(j, "model",
             {"kind", "d", "m", "lattice", "a", "alpha", "mass", "perturbation"});
  ModelBlock model;
  model.kind = get_string(j, "model", "kind", "");
  if (model.kind != "dirac" && model.kind != "diagonal")
    bad("model.kind must be \"dirac\" or \"diagonal\"");
  model.d = static_cast<int>(get_int(j, "model", "d", 0));
  if (model.d < 1) bad("model.d must be a positive integer");
  const bool dirac = model.kind == "dirac";
  if (dirac) {
    if (model.d > 8) bad("model.d exceeds the supported Clifford range 1..8");
    if (j.count("m")) bad("model.m is derived for the dirac model");
    if (j.count("a")) bad("model.a is derived for the dirac model");
    model.alpha = get_double(j, "model", "alpha", 1.0);
    if (model.alpha != 1.0) bad("model.alpha must be 1 for the dirac model");
    model.mass = get_double(j, "model", "mass", 0.0);
    model.m = build_generators(model.d).m;
  } else {
    if (j.count("mass")) bad("model.mass requires the dirac model");
    model.a = as_double_vec(require(j, "model", "a"), "model.a");
    if (model.a.empty()) bad("model.a must not be empty");
    model.m = static_cast<int>(get_int(j, "model", "m", (long long)model.a.size()));
    if (model.m != static_cast<int>(model.a.size()))
      bad("model.m must match the length of model.a");
    model.alpha = get_double(j, "model", "alpha", 1.0);
    if (model.alpha <= 0.0) bad("model.alpha must be positive");
  }

  const ojson& lat = require(j, "model", "lattice");
  if (lat.is_string()) {
    if (lat.get<std::string>() != "aperiodic")
      bad("model.lattice must be a d x d matrix or \"aperiodic\"");
    model.aperiodic = true;
  } else {
    if (!lat.is_array() || static_cast<int>(lat.size()) != model.d)
      bad("model.lattice must have d rows");
    model.lattice.resize(model.d, model.d);
    for (int i = 0; i < model.d; ++i) {
      const auto row = as_double_vec(lat[i], "model.lattice");
      if (static_cast<int>(row.size()) != model.d) bad("model.lattice rows must have d entries");
      for (int c = 0; c < model.d; ++c) model.lattice(i, c) = row[c];
    }
  }

  if (auto it = j.find("perturbation"); it != j.end()) {
    if (!it->is_array()) bad("model.perturbation must be an array");
    for (const auto& pj : *it) {
      if (!pj.is_object()) bad("model.perturbation entries must be objects");
      check_keys(pj, "model.perturbation", {"theta", "expr"});
      PerturbationEntry entry;
      entry.theta = as_double_vec(require(pj, "model.perturbation", "theta"),
                                  "model.perturbation.theta");
      if (static_cast<int>(entry.theta.size()) != model.d)
        bad("model.perturbation.theta must have d components");
      entry.expr = get_string(pj, "model.perturbation", "expr", "");
      if (entry.expr.empty()) bad("model.perturbation.expr must be a non-empty string");
      model.perturbation.push_back(std::move(entry));
    }
  }
  return model;
}

GaugeBlock parse_gauge(const ojson& j) {
  check_keys(j, "gauge", {"delta", "s", "variant", "kTilde", "K", "epsTrim", "l",
                          "beta", "mode", "targetN"});
  GaugeBlock g;
  g.present = true;
  g.delta = get_double(j, "gauge", "delta", 0.0);
  g.s = get_double(j, "gauge", "s", 1.0);
  if (g.s <= 0.0) bad("gauge.s must be positive");
  g.variant = get_string(j, "gauge", "variant", "weak");
  if (g.variant != "weak" && g.variant != "parallel")
    bad("gauge.variant must be \"weak\" or \"parallel\"");
  g.kTilde = static_cast<int>(get_int(j, "gauge", "kTilde", 1));
  if (g.kTilde < 1) bad("gauge.kTilde must be at least 1");
  g.K = static_cast<int>(get_int(j, "gauge", "K", -1));
  g.epsTrim = get_double(j, "gauge", "epsTrim", 1e-9);
  if (g.epsTrim < 0.0) bad("gauge.epsTrim must be non-negative");
  g.l = get_double(j, "gauge", "l", 0.0);
  g.beta = get_double(j, "gauge", "beta", 0.0);
  g.mode = get_string(j, "gauge", "mode", "one-step");
  if (g.mode != "one-step" && g.mode != "full")
    bad("gauge.mode must be \"one-step\" or \"full\"");
  g.targetN = static_cast<int>(get_int(j, "gauge", "targetN", 1));
  if (g.targetN < 1) bad("gauge.targetN must be at least 1");
  return g;
}

SpectraBlock parse_spectra(const ojson& j, int d) {
  check_keys(j, "spectra", {"R", "kGrid", "kOffset", "window", "lambdas", "nLambda"});
  SpectraBlock s;
  s.present = true;
  s.R = get_double(j, "spectra", "R", 0.0);
  if (s.R <= 0.0) bad("spectra.R must be positive");
  const ojson& kg = require(j, "spectra", "kGrid");
  if (!kg.is_array() || static_cast<int>(kg.size()) != d)
    bad("spectra.kGrid must have d entries");
  for (const auto& v : kg) {
    const long long n = as_int(v, "spectra.kGrid");
    if (n < 1) bad("spectra.kGrid entries must be positive");
    s.kGrid.push_back(static_cast<int>(n));
  }
  s.kOffset = get_double(j, "spectra", "kOffset", 0.5);
  if (s.kOffset < 0.0 || s.kOffset >= 1.0) bad("spectra.kOffset must lie in [0, 1)");
  const auto win = as_double_vec(require(j, "spectra", "window"), "spectra.window");
  if (win.size() != 2 || !(win[0] < win[1]))
    bad("spectra.window must be [lo, hi] with lo < hi");
  s.windowLo = win[0];
  s.windowHi = win[1];
  const bool hasList = j.count("lambdas") != 0;
  if (hasList && j.count("nLambda"))
    bad("spectra.lambdas and spectra.nLambda are mutually exclusive");
  if (hasList) {
    s.lambdas = as_double_vec(j.at("lambdas"), "spectra.lambdas");
    if (s.lambdas.empty()) bad("spectra.lambdas must not be empty");
    s.nLambda = 0;
  } else {
    s.nLambda = static_cast<int>(get_int(j, "spectra", "nLambda", 16));
    if (s.nLambda < 1) bad("spectra.nLambda must be at least 1");
  }
  return s;
}

GeometryBlock parse_geometry(const ojson& j) {
  check_keys(j, "geometry",
             {"rho", "delta", "deltaExponent", "kappa", "nu", "omega", "Z", "seeds",
              "nSamples", "freqRadiusFactor", "certify", "fiberR", "tFactor"});
  GeometryBlock g;
  g.present = true;
  g.rho = as_double_vec(require(j, "geometry", "rho"), "geometry.rho");
  if (g.rho.empty()) bad("geometry.rho must not be empty");
  for (double r : g.rho)
    if (r <= 0.0) bad("geometry.rho entries must be positive");
  const bool hasDelta = j.count("delta") != 0;
  const bool hasExp = j.count("deltaExponent") != 0;
  if (hasDelta == hasExp)
    bad("geometry needs exactly one of delta or deltaExponent");
  g.hasFixedDelta = hasDelta;
  if (hasDelta) {
    g.delta = as_double(j.at("delta"), "geometry.delta");
    if (g.delta <= 0.0) bad("geometry.delta must be positive");
  } else {
    g.deltaExponent = as_double(j.at("deltaExponent"), "geometry.deltaExponent");
    if (g.deltaExponent <= 0.0) bad("geometry.deltaExponent must be positive");
  }
  g.kappa = get_double(j, "geometry", "kappa", 0.2);
  g.nu = get_double(j, "geometry", "nu", 0.7);
  g.omega = get_double(j, "geometry", "omega", 0.6);
  g.Z = get_double(j, "geometry", "Z", 8.0);
  if (auto it = j.find("seeds"); it != j.end()) {
    if (!it->is_array()) bad("geometry.seeds must be an array");
    for (const auto& v : *it) {
      if (!v.is_number_integer() && !v.is_number_unsigned())
        bad("geometry.seeds entries must be integers");
      g.seeds.push_back(v.get<unsigned long long>());
    }
  }
  if (g.seeds.empty()) g.seeds.push_back(12345ull);
  if (g.seeds.size() != 1 && g.seeds.size() != g.rho.size())
    bad("geometry.seeds must have one entry or one per rho");
  g.nSamples = get_int(j, "geometry", "nSamples", 100000);
  if (g.nSamples < 1) bad("geometry.nSamples must be positive");
  g.freqRadiusFactor = get_double(j, "geometry", "freqRadiusFactor", 3.0);
  if (g.freqRadiusFactor <= 0.0) bad("geometry.freqRadiusFactor must be positive");
  g.certify = get_bool(j, "geometry", "certify", false);
  g.fiberR = get_double(j, "geometry", "fiberR", 0.0);
  if (g.fiberR < 0.0) bad("geometry.fiberR must be non-negative");
  if (g.certify && g.fiberR <= 0.0) bad("geometry.fiberR is required when certify is true");
  g.tFactor = get_double(j, "geometry", "tFactor", 0.005);
  if (g.tFactor <= 0.0) bad("geometry.tFactor must be positive");
  return g;
}

OutputBlock parse_output(const ojson& j) {
  check_keys(j, "output", {"dir", "bands", "report"});
  OutputBlock o;
  o.dir = get_string(j, "output", "dir", "");
  o.bands = get_string(j, "output", "bands", "");
  o.report = get_string(j, "output", "report", "");
  return o;
}

ojson double_array(const std::vector<double>& v) {
  ojson a = ojson::array();
  for (double x : v) a.push_back(x);
  return a;
}

}  // namespace

std::string format_double17(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string dump_json17(const ojson& j, int indent) {
  std::string out;
  dump_value(j, out, indent, 0);
  return out;
}

ExperimentConfig parse_experiment_config(const std::string& text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    bad(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) bad("config root must be an object");
  check_keys(j, "config", {"model", "gauge", "spectra", "geometry", "output"});

  ExperimentConfig cfg;
  cfg.model = parse_model(require(j, "config", "model"));
  if (auto it = j.find("gauge"); it != j.end()) cfg.gauge = parse_gauge(*it);
  if (auto it = j.find("spectra"); it != j.end())
    cfg.spectra = parse_spectra(*it, cfg.model.d);
  if (auto it = j.find("geometry"); it != j.end()) cfg.geometry = parse_geometry(*it);
  if (auto it = j.find("output"); it != j.end()) cfg.output = parse_output(*it);

  // Canonicalize the DSL strings through a parse/print round; this validates
  // them against the model's dimensions and atom bindings as a side effect.
  std::shared_ptr<const CliffordRep> rep;
  if (cfg.model.kind == "dirac")
    rep = std::make_shared<const CliffordRep>(build_generators(cfg.model.d));
  DslContext ctx;
  ctx.d = cfg.model.d;
  ctx.m = cfg.model.m;
  ctx.rep = rep.get();
  for (auto& entry : cfg.model.perturbation)
    entry.expr = print_coeff_expr(parse_coeff_expr(entry.expr, ctx), ctx);
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

ojson config_to_json(const ExperimentConfig& cfg) {
  ojson j;
  ojson model;
  model["kind"] = cfg.model.kind;
  model["d"] = cfg.model.d;
  if (cfg.model.kind == "diagonal") {
    model["m"] = cfg.model.m;
    if (cfg.model.aperiodic)
      model["lattice"] = "aperiodic";
    else {
      ojson rows = ojson::array();
      for (int i = 0; i < cfg.model.d; ++i) {
        ojson row = ojson::array();
        for (int c = 0; c < cfg.model.d; ++c) row.push_back(cfg.model.lattice(i, c));
        rows.push_back(std::move(row));
      }
      model["lattice"] = std::move(rows);
    }
    model["a"] = double_array(cfg.model.a);
    model["alpha"] = cfg.model.alpha;
  } else {
    if (cfg.model.aperiodic)
      model["lattice"] = "aperiodic";
    else {
      ojson rows = ojson::array();
      for (int i = 0; i < cfg.model.d; ++i) {
        ojson row = ojson::array();
        for (int c = 0; c < cfg.model.d; ++c) row.push_back(cfg.model.lattice(i, c));
        rows.push_back(std::move(row));
      }
      model["lattice"] = std::move(rows);
    }
    model["alpha"] = cfg.model.alpha;
    model["mass"] = cfg.model.mass;
  }
  ojson perts = ojson::array();
  for (const auto& p : cfg.model.perturbation) {
    ojson e;
    e["theta"] = double_array(p.theta);
    e["expr"] = p.expr;
    perts.push_back(std::move(e));
  }
  model["perturbation"] = std::move(perts);
  j["model"] = std::move(model);

  if (cfg.gauge.present) {
    ojson g;
    g["delta"] = cfg.gauge.delta;
    g["s"] = cfg.gauge.s;
    g["variant"] = cfg.gauge.variant;
    g["kTilde"] = cfg.gauge.kTilde;
    g["K"] = cfg.gauge.K;
    g["epsTrim"] = cfg.gauge.epsTrim;
    g["l"] = cfg.gauge.l;
    g["beta"] = cfg.gauge.beta;
    g["mode"] = cfg.gauge.mode;
    g["targetN"] = cfg.gauge.targetN;
    j["gauge"] = std::move(g);
  }
  if (cfg.spectra.present) {
    ojson s;
    s["R"] = cfg.spectra.R;
    ojson kg = ojson::array();
    for (int n : cfg.spectra.kGrid) kg.push_back(n);
    s["kGrid"] = std::move(kg);
    s["kOffset"] = cfg.spectra.kOffset;
    s["window"] = double_array({cfg.spectra.windowLo, cfg.spectra.windowHi});
    if (!cfg.spectra.lambdas.empty())
      s["lambdas"] = double_array(cfg.spectra.lambdas);
    else
      s["nLambda"] = cfg.spectra.nLambda;
    j["spectra"] = std::move(s);
  }
  if (cfg.geometry.present) {
    ojson g;
    g["rho"] = double_array(cfg.geometry.rho);
    if (cfg.geometry.hasFixedDelta)
      g["delta"] = cfg.geometry.delta;
    else
      g["deltaExponent"] = cfg.geometry.deltaExponent;
    g["kappa"] = cfg.geometry.kappa;
    g["nu"] = cfg.geometry.nu;
    g["omega"] = cfg.geometry.omega;
    g["Z"] = cfg.geometry.Z;
    ojson seeds = ojson::array();
    for (auto s : cfg.geometry.seeds) seeds.push_back(s);
    g["seeds"] = std::move(seeds);
    g["nSamples"] = cfg.geometry.nSamples;
    g["freqRadiusFactor"] = cfg.geometry.freqRadiusFactor;
    g["certify"] = cfg.geometry.certify;
    g["fiberR"] = cfg.geometry.fiberR;
    g["tFactor"] = cfg.geometry.tFactor;
    j["geometry"] = std::move(g);
  }
  if (!cfg.output.dir.empty() || !cfg.output.bands.empty() || !cfg.output.report.empty()) {
    ojson o;
    if (!cfg.output.dir.empty()) o["dir"] = cfg.output.dir;
    if (!cfg.output.bands.empty()) o["bands"] = cfg.output.bands;
    if (!cfg.output.report.empty()) o["report"] = cfg.output.report;
    j["output"] = std::move(o);
  }
  return j;
}

std::string canonical_config_json(const ExperimentConfig& cfg) {
  return dump_json17(config_to_json(cfg), 2) + "\n";
}

BuiltModel build_model_symbol(const ModelBlock& model) {
  std::shared_ptr<const CliffordRep> rep;
  std::vector<double> coeffs;
  MatrixSymbol::Builder base(model.d, model.m, model.alpha);
  if (model.kind == "dirac") {
    rep = std::make_shared<const CliffordRep>(build_generators(model.d));
    coeffs.assign(static_cast<std::size_t>(rep->m), 1.0);
    for (int i = rep->m / 2; i < rep->m; ++i) coeffs[static_cast<std::size_t>(i)] = -1.0;
  } else {
    coeffs = model.a;
    Mat diag = Mat::Zero(model.m, model.m);
    for (int i = 0; i < model.m; ++i) diag(i, i) = model.a[static_cast<std::size_t>(i)];
    base.add(Freq::zero(model.d), product({const_matrix(diag), hom(model.alpha)}));
  }
  MatrixSymbol baseSym =
      model.kind == "dirac" ? free_dirac_symbol(*rep, model.mass) : base.build();

  if (model.perturbation.empty())
    return BuiltModel{std::move(baseSym), rep, std::move(coeffs), model.alpha};

  DslContext ctx;
  ctx.d = model.d;
  ctx.m = model.m;
  ctx.rep = rep.get();
  MatrixSymbol::Builder pert(model.d, model.m, 0.0);
  for (const auto& entry : model.perturbation)
    pert.add(Freq::from_doubles(entry.theta), parse_coeff_expr(entry.expr, ctx));
  MatrixSymbol full = add(baseSym, pert.build()).with_order(model.alpha);
  return BuiltModel{std::move(full), rep, std::move(coeffs), model.alpha};
}

PeriodicModel build_periodic_model(const ExperimentConfig& cfg) {
  if (cfg.model.aperiodic)
    bad("this command needs a periodic lattice, but the model is aperiodic");
  BuiltModel bm = build_model_symbol(cfg.model);
  return make_periodic_model(cfg.model.lattice, std::move(bm.symbol), bm.principalCoeffs,
                             bm.alpha);
}

double geometry_delta_at(const GeometryBlock& g, double rho) {
  return g.hasFixedDelta ? g.delta : std::pow(rho, -g.deltaExponent);
}

ResonanceGeometryConfig build_geometry_config(const ExperimentConfig& cfg, int rhoIndex) {
  const GeometryBlock& g = cfg.geometry;
  if (!g.present) bad("the config has no geometry block");
  if (rhoIndex < 0 || rhoIndex >= static_cast<int>(g.rho.size()))
    bad("geometry rho index out of range");
  BuiltModel bm = build_model_symbol(cfg.model);

  ResonanceGeometryConfig out;
  out.d = cfg.model.d;
  for (double c : bm.principalCoeffs)
    if (c > 0.0) out.sheetCoeffs.push_back(c);
  if (out.sheetCoeffs.empty())
    bad("geometry needs at least one positive principal coefficient");
  out.alpha = bm.alpha;
  out.rho = g.rho[static_cast<std::size_t>(rhoIndex)];
  out.delta = geometry_delta_at(g, out.rho);
  out.kappa = g.kappa;
  out.nu = g.nu;
  out.omega = g.omega;
  out.Z = g.Z;
  if (cfg.model.aperiodic) {
    for (const auto& p : cfg.model.perturbation)
      out.freqs.push_back(Eigen::Map<const Eigen::VectorXd>(p.theta.data(),
                                                            (Eigen::Index)p.theta.size()));
    if (out.freqs.empty()) bad("an aperiodic model needs perturbation frequencies");
  } else {
    for (const Freq& f : enumerate_dual(cfg.model.lattice, g.freqRadiusFactor * out.rho)) {
      const auto v = f.to_doubles();
      out.freqs.push_back(
          Eigen::Map<const Eigen::VectorXd>(v.data(), (Eigen::Index)v.size()));
    }
  }
  return out;
}

}  // namespace gc
