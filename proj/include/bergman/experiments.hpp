#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "bergman/kernels.hpp"
#include "bergman/operators.hpp"
#include "bergman/tree.hpp"

// Config-driven experiment drivers tying the geometry, tree, kernel and
// operator layers together: reverse Cauchy-Schwarz per tree cell, the
// oscillation discretization chain, the Schatten-sum vs cell-oscillation
// ratio sweep, the cutoff divergence ladders, and the geometry suite.
// Every driver returns a Report whose assertions carry measured margins,
// and reports serialize deterministically for fixed config + seed.
//
// Symbols enter in the factored form sum_t c_t z^a zbar^b (1-|z|^2)^g.
// Keeping the (1-|z|^2)^g factor unexpanded matters numerically: expanded
// binomial coefficients cancel catastrophically near the boundary, while
// the factored evaluations and the beta-moment inner products below stay
// accurate at machine precision arbitrarily close to |z| = 1.

namespace bergman {

// ---------------------------------------------------------------------------
// factored symbols (n = 1)

struct FactoredTerm {
  int a = 0;      // z exponent
  int b = 0;      // zbar exponent
  int g = 0;      // (1 - |z|^2) exponent
  complexd coeff = 1.0;
};

class FactoredSymbol {
 public:
  FactoredSymbol() = default;
  explicit FactoredSymbol(std::vector<FactoredTerm> terms);

  // named test symbols: "zbar", "z2zbar", "zbar_decay4", "decay2", "one"
  static FactoredSymbol named(const std::string& name);

  const std::vector<FactoredTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  bool constant() const;  // every term has a = b = g = 0
  int degree() const;     // max over terms of a + b + 2g

  // all terms share one charge a - b (then MO and |f| are radial)
  bool charge_homogeneous(int* shift = nullptr) const;

  FactoredSymbol conj() const;
  FactoredSymbol operator*(const FactoredSymbol& g) const;
  FactoredSymbol operator-(complexd c) const;

  // |f|^2 = f * conj(f), collected
  FactoredSymbol abs_sq() const;

  // stable evaluation from (z, 1 - |z|^2); the caller supplies the
  // complement so near-boundary points lose no digits
  complexd eval(complexd z, double one_minus_sq) const;

  // binomial expansion into the monomial Symbol algebra (exact away from
  // the boundary; used by the exact box-statistics cross-checks)
  Symbol expand() const;

 private:
  std::vector<FactoredTerm> terms_;
};

// int u^k (1-u)^{g+gamma} (gamma+1) du over [0,1]; g = 0 gives the moment
// m_k.  Evaluated by log-gamma, no cancellation.
double decay_moment(double gamma, long long k, int g);

// Exact dv_gamma mean and squared L^2 norm of a factored symbol.
complexd factored_mean(const FactoredSymbol& f, double gamma);
double factored_norm_sq(const FactoredSymbol& f, double gamma);

// Berezin transform of a factored symbol at |z|^2 = t (n = 1), through the
// kernel power series: every series coefficient is nonnegative per term, so
// the (1-t)^{n+1+gamma} prefactor carries the boundary decay stably.  Series
// truncation error is kept below tail_tol relative to the accumulated sum.
complexd berezin_factored(const FactoredSymbol& f, double gamma, double t,
                          double tail_tol = 1e-13);

// MO_gamma(f)^2 at |z|^2 = t via B(|f|^2) - |B(f)|^2 (radial symbols give
// radial MO; callers pass t directly).  Negative radicands within fp noise
// clamp to zero.
double mo_sq_factored(const FactoredSymbol& f, double gamma, double t);

// ---------------------------------------------------------------------------
// operator-side sums without box truncation

// Singular values of the Hankel operator (I - P) M_f P restricted to the
// holomorphic basis columns z^a / sqrt(m_a), a = 0..D, computed from exact
// beta-moment inner products.  Charge-homogeneous symbols give orthogonal
// columns (diagonal Gram, any D); otherwise the banded Gram is solved
// densely (D <= 2048 guard).
std::vector<double> hankel_column_singular_values(const FactoredSymbol& f,
                                                  double gamma, int D);

// sum_a s_a^p over both Hankel families of the commutator
// [M_f, P] = H_f - H_fbar^*, whose singular value multiset is the union of
// the two families' singular values.
double commutator_schatten_power_p(const FactoredSymbol& f, double gamma,
                                   double p, int D);

// ---------------------------------------------------------------------------
// invariant-measure integrals of MO^p (n = 1, radial MO)

// T(u_max) = int_{|z|^2 <= u_max} MO_gamma(f)^p dtau, radial reduction with
// the substitution u = 1 - e^{-w} (panel Gauss rules in w).  `closed_form`
// routes MO through the gamma = 0, f = zbar oracle instead of the factored
// series (exact arbitrarily deep; requires that config).
double mo_p_tau_integral(const FactoredSymbol& f, double gamma, double p,
                         double u_max, bool closed_form = false,
                         int panel_order = 16);

// Floor envelope integral int_{|z|^2 <= u_max} (1-|z|^2)^{p m / 2} dtau in
// closed form (m = n + 1 + gamma, n = 1).
double floor_tau_integral(double gamma, double p, double u_max);

// ---------------------------------------------------------------------------
// cell-region quadrature (n = 1 polar boxes)

struct WeightedPoints {
  std::vector<complexd> z;
  std::vector<double> one_minus_sq;  // 1 - |z|^2, computed stably
  std::vector<double> w;             // dv_gamma weights
  double mass = 0.0;                 // sum of weights ~ v_gamma(region)
};

// Tensor Gauss rule of the given 1d order per box, weight dv_gamma.
WeightedPoints box_quadrature(const std::vector<PolarBox>& boxes, double gamma,
                              int order);

// V(f; E)^2 over the boxes, computed in values centered at f(center) so
// that deep cells (where f barely moves) lose no digits.
double oscillation_sq(const WeightedPoints& pts, const FactoredSymbol& f,
                      complexd center, double center_one_minus_sq);

// ---------------------------------------------------------------------------
// experiment configuration and reports

struct ExperimentConfig {
  int n = 1;
  double gamma = 0.0;
  double lambda = 0.0866433975699932;  // ln2 / 8
  std::string mode = "dyadic";         // "dyadic" | "generic"
  int depth = 8;                       // rho
  double neighbor_radius = 0.1732867951399863;  // R, default 2 lambda
  int coloring_scale = 4;              // M
  std::vector<double> p_list{1.0, 1.2};
  nlohmann::ordered_json symbol = "zbar";  // name or [[a,b,g,re,im], ...]
  int degree_cap = 64;                 // D
  int box_order = 6;                   // per-box tensor Gauss order (serialized under "quadrature")
  QuadratureSpec quadrature;           // generic integrators (MO cross-checks)
  bool strict_lambda_check = false;    // hard-fail the smallness validation
  std::string out_json;
  std::string out_csv;
  std::uint64_t seed = 20240718ULL;

  double cutoff() const;               // 2n / (n + 1 + gamma)
  double margin(double p) const;       // p (n + 1 + gamma) - 2n
  FactoredSymbol make_symbol() const;
  TreeConfig tree_config(int depth_override = -1) const;
};

ExperimentConfig config_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg);

// build_tree with a size pre-check: refuses configs whose node count would
// not fit at desk scale (predicted from the closed n = 1 arc-count rule, or
// from lambda * depth for n >= 2) instead of thrashing memory.
BergmanTree build_tree_guarded(const TreeConfig& tc);

struct CheckResult {
  std::string name;
  bool pass = false;
  double margin = 0.0;  // how far inside the asserted inequality
  std::string detail;
};

struct Report {
  std::string experiment;
  nlohmann::ordered_json inputs;     // config echo
  nlohmann::ordered_json tables;     // name -> array of row objects
  nlohmann::ordered_json constants;  // name -> measured scalar
  std::vector<CheckResult> checks;
  bool truncated = false;   // a region or sum hit the depth/degree cutoff
  double wall_seconds = 0;  // excluded from the deterministic payload

  bool all_pass() const;
  void add_check(const std::string& name, bool pass, double margin,
                 const std::string& detail = "");
};

// Deterministic serialization (everything except wall_seconds).
nlohmann::ordered_json report_to_json(const Report& r);
Report report_from_json(const nlohmann::ordered_json& j);

// Writes report JSON and the flattened CSV (long format: experiment, table,
// row, column, value with %.17g scalars).  Empty path skips that artifact.
// Wall time goes to "<json_path>.time" so the main artifacts stay
// byte-deterministic for fixed config + seed.
void emit_report(const Report& r, const std::string& json_path,
                 const std::string& csv_path);

// ---------------------------------------------------------------------------
// drivers

// Per-cell reverse Cauchy-Schwarz: LHS = V(f; Q_nu)^2 against the kernel
// double integral RHS; asserts a positive global lower ratio, a finite upper
// ratio, and <= 2x band drift between depth-6 and depth-8 cell sets.
Report run_reverse_cs(const ExperimentConfig& cfg);

// Discretization chain T <= c1 A <= c2 B <= c3 C over nodes of depth <= rho,
// with <= 2x constant drift between rho - 2 and rho.
Report run_discretization_chain(const ExperimentConfig& cfg);

// Schatten power sum S(D) vs discrete oscillation sum V(rho): plateau or
// divergence per the p vs cutoff regime, ratio band across the sweep, and
// the small-D singular-value cross-check against the assembled matrices.
Report run_main_theorem_ratio(const ExperimentConfig& cfg);

// MO^p dtau truncation ladders T(eps) and the closed-form floor integral:
// growth >= 10% per refinement at p <= cutoff, plateau above the cutoff,
// divergence of the floor exactly at p <= cutoff.
Report run_cutoff_divergence(const ExperimentConfig& cfg);

// Measured-constant re-verification of the geometry and tree invariants:
// metric identities, volume law, radii sandwich, child counts, separation,
// apex containment, coloring, neighbor counting, chain overlap.
Report run_geometry_suite(const ExperimentConfig& cfg);

}  // namespace bergman
