#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gc/clifford.hpp"
#include "gc/geometry.hpp"
#include "gc/spectra.hpp"
#include "gc/symbol.hpp"

namespace gc {

// Serializes with insertion-order keys and every floating-point number
// rendered at 17 significant digits, so identical inputs give identical
// bytes. Non-finite values become null. indent < 0 packs onto one line.
std::string dump_json17(const nlohmann::ordered_json& j, int indent = 2);

// One significand-preserving double, the same formatting dump_json17 uses.
std::string format_double17(double x);

struct PerturbationEntry {
  std::vector<double> theta;
  std::string expr;  // coefficient DSL, stored in canonical printed form
};

// "dirac": free Dirac symbol of the requested mass; m and the principal
// coefficients (+1/-1 per spinor half) are derived from d.
// "diagonal": diag(a_1, ..., a_m) |xi|^alpha; all fields explicit.
struct ModelBlock {
  std::string kind = "diagonal";
  int d = 2;
  int m = 1;
  bool aperiodic = false;
  Eigen::MatrixXd lattice;  // d x d basis, row i of the JSON array = row i
  std::vector<double> a;
  double alpha = 1.0;
  double mass = 0.0;
  std::vector<PerturbationEntry> perturbation;
};

struct GaugeBlock {
  bool present = false;
  double delta = 0.0;
  double s = 1.0;
  std::string variant = "weak";  // "weak" or "parallel"
  int kTilde = 1;
  int K = -1;  // series length; < 0 selects from the measured psi norm
  double epsTrim = 1e-9;
  double l = 0.0;     // frequency weight of the norm ledger
  double beta = 0.0;  // order of the off-diagonal perturbation
  std::string mode = "one-step";  // uncoupling: "one-step" or "full"
  int targetN = 1;
};

struct SpectraBlock {
  bool present = false;
  double R = 0.0;
  std::vector<int> kGrid;
  double kOffset = 0.5;
  double windowLo = 0.0;
  double windowHi = 0.0;
  std::vector<double> lambdas;  // explicit grid; exclusive with nLambda
  int nLambda = 16;
};

struct GeometryBlock {
  bool present = false;
  std::vector<double> rho;
  bool hasFixedDelta = false;
  double delta = 0.0;          // fixed collar half-width
  double deltaExponent = 0.0;  // otherwise delta = rho^-deltaExponent
  double kappa = 0.2;
  double nu = 0.7;
  double omega = 0.6;
  double Z = 8.0;
  std::vector<unsigned long long> seeds;
  long nSamples = 100000;
  double freqRadiusFactor = 3.0;  // dual-lattice truncation radius / rho
  bool certify = false;
  double fiberR = 0.0;  // fiber truncation for the counting certificate
  double tFactor = 0.005;
};

struct OutputBlock {
  std::string dir;
  std::string bands;   // CSV file name; empty selects "bands.csv"
  std::string report;  // JSON file name; empty selects "<command>.json"
};

struct ExperimentConfig {
  ModelBlock model;
  GaugeBlock gauge;
  SpectraBlock spectra;
  GeometryBlock geometry;
  OutputBlock output;
};

// Validates shapes and ranges, canonicalizes the DSL strings through a
// parse/print round, and rejects unknown keys. Throws ConfigError, or the
// DSL's own SyntaxError/UnknownAtom/ArityError for bad expressions.
ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);

// Fixed key order, defaults materialized, absent blocks omitted. Acts as the
// canonical form: parse(canonical(c)) serializes back to the same bytes.
nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg);
std::string canonical_config_json(const ExperimentConfig& cfg);

// Base symbol plus perturbation entries. rep is null for diagonal models.
struct BuiltModel {
  MatrixSymbol symbol;
  std::shared_ptr<const CliffordRep> rep;
  std::vector<double> principalCoeffs;
  double alpha = 1.0;
};
BuiltModel build_model_symbol(const ModelBlock& model);

// Periodic Floquet model; requires a lattice (ConfigError when aperiodic).
PeriodicModel build_periodic_model(const ExperimentConfig& cfg);

// Resonance-geometry instance for rho = cfg.geometry.rho[rhoIndex]. Sheet
// coefficients are the positive principal coefficients; frequencies come
// from the dual lattice inside freqRadiusFactor * rho, or from the
// perturbation thetas when the model is aperiodic.
ResonanceGeometryConfig build_geometry_config(const ExperimentConfig& cfg, int rhoIndex);

// Collar half-width at rho, resolving the fixed-vs-exponent rule.
double geometry_delta_at(const GeometryBlock& g, double rho);

}  // namespace gc
