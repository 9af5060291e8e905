#include "bergman/operators.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace bergman {

namespace {

void require_disc(const Symbol& f) {
  if (f.dim() != 1)
    throw std::invalid_argument("operator models are built for n = 1 symbols");
}

double clamp0(double x) { return x > 0.0 ? x : 0.0; }

}  // namespace

TruncatedBasis::TruncatedBasis(int D, double gamma) : D_(D), gamma_(gamma) {
  if (D < 1) throw std::domain_error("TruncatedBasis: degree cap D >= 1");
  if (!(gamma > -1.0)) throw std::domain_error("TruncatedBasis: gamma > -1");

  sector_offset_.assign(2 * D + 2, 0);
  for (int q = -D; q <= D; ++q) {
    sector_offset_[q + D] = int(index_.size());
    for (int j = 0; j <= D - std::abs(q); ++j) index_.push_back({q, j});
  }
  sector_offset_[2 * D + 1] = int(index_.size());

  const int nodes = 2 * D + 33;
  rule_ = gauss_rule(jacobi_recurrence01(gamma, 0.0, nodes + 1), nodes);

  phi_.resize(D + 1);
  std::vector<std::vector<double>> monic_norm(D + 1);
  std::vector<OrthoRecurrence> recs(D + 1);
  for (int m = 0; m <= D; ++m) {
    const int maxdeg = D - m;
    recs[m] = jacobi_recurrence01(gamma, double(m), maxdeg + 2);
    phi_[m].resize(maxdeg + 1, nodes);
    std::vector<double> vals(maxdeg + 1);
    for (int i = 0; i < nodes; ++i) {
      eval_orthonormal(recs[m], maxdeg, rule_.x[i], vals.data());
      for (int j = 0; j <= maxdeg; ++j) phi_[m](j, i) = vals[j];
    }
  }

  // Monomial realization of each basis vector.  The recurrence is run in
  // coefficient space; these symbols are bookkeeping only (assembly always
  // goes through the stable node-value tables above).
  symbols_.reserve(index_.size());
  for (int q = -D; q <= D; ++q) {
    const int m = std::abs(q);
    const int maxdeg = D - m;
    const auto& rec = recs[m];
    std::vector<std::vector<double>> monic(maxdeg + 1);
    monic[0] = {1.0};
    if (maxdeg >= 1) monic[1] = {-rec.a[0], 1.0};
    for (int j = 1; j < maxdeg; ++j) {
      std::vector<double> next(j + 2, 0.0);
      for (size_t i = 0; i < monic[j].size(); ++i) {
        next[i + 1] += monic[j][i];
        next[i] -= rec.a[j] * monic[j][i];
      }
      for (size_t i = 0; i < monic[j - 1].size(); ++i)
        next[i] -= rec.b[j] * monic[j - 1][i];
      monic[j + 1] = std::move(next);
    }
    double norm_sq = rec.b[0];
    for (int j = 0; j <= maxdeg; ++j) {
      if (j > 0) norm_sq *= rec.b[j];
      // R_j = monic_j / (||monic_j|| sqrt(gamma + 1))
      const double scale = 1.0 / std::sqrt(norm_sq * (gamma + 1.0));
      Symbol s(1);
      for (size_t c = 0; c < monic[j].size(); ++c) {
        const double v = monic[j][c] * scale;
        if (v == 0.0) continue;
        if (q >= 0)
          s.add_term({q + int(c)}, {int(c)}, v);
        else
          s.add_term({int(c)}, {-q + int(c)}, v);
      }
      symbols_.push_back(std::move(s));
    }
  }

  // Conditioning guard: re-check orthonormality of the highest-degree pairs
  // on an independent rule.  The recurrence route is benign, but a defect
  // here would mean the moment data itself has degenerated.
  Rule1D check = gauss_rule(jacobi_recurrence01(gamma, 0.0, nodes + 38), nodes + 37);
  for (int m : {0, D / 2, D}) {
    const int top = D - m;
    std::vector<double> vals(top + 1);
    double nrm = 0.0, cross = 0.0;
    for (size_t i = 0; i < check.x.size(); ++i) {
      eval_orthonormal(recs[m], top, check.x[i], vals.data());
      const double wm = check.w[i] * std::pow(check.x[i], m);
      nrm += wm * vals[top] * vals[top];
      if (top >= 1) cross += wm * vals[top] * vals[top - 1];
    }
    defect_ = std::max(defect_, std::abs(nrm - 1.0));
    defect_ = std::max(defect_, std::abs(cross));
  }
  if (!(defect_ < 1e-8))
    throw std::overflow_error(
        "TruncatedBasis: orthonormality defect " + std::to_string(defect_) +
        " exceeds the conditioning guard; reduce D");
}

int TruncatedBasis::sector_size(int q) const {
  return std::abs(q) > D_ ? 0 : D_ - std::abs(q) + 1;
}

int TruncatedBasis::position(int q, int j) const {
  if (std::abs(q) > D_ || j < 0 || j > D_ - std::abs(q)) return -1;
  return sector_offset_[q + D_] + j;
}

const Eigen::VectorXd& TruncatedBasis::power(int E) const {
  if (E < 0) throw std::domain_error("TruncatedBasis: negative u-power");
  if (upow_.empty()) {
    upow_.emplace_back(Eigen::VectorXd::Ones(rule_.x.size()));
  }
  while (int(upow_.size()) <= E) {
    Eigen::VectorXd next = upow_.back();
    for (size_t i = 0; i < rule_.x.size(); ++i) next[i] *= rule_.x[i];
    upow_.push_back(std::move(next));
  }
  return upow_[E];
}

double TruncatedBasis::radial_pair(int m1, int j, int m2, int k, int E) const {
  const Eigen::VectorXd& p = power(E);
  const int nodes = int(rule_.x.size());
  double acc = 0.0;
  for (int i = 0; i < nodes; ++i)
    acc += rule_.w[i] * p[i] * phi_[m1](j, i) * phi_[m2](k, i);
  return acc;
}

double TruncatedBasis::radial_single(int m, int k, int E) const {
  const Eigen::VectorXd& p = power(E);
  const int nodes = int(rule_.x.size());
  double acc = 0.0;
  for (int i = 0; i < nodes; ++i) acc += rule_.w[i] * p[i] * phi_[m](k, i);
  return acc * std::sqrt(gamma_ + 1.0);
}

Eigen::VectorXcd TruncatedBasis::expand(const Symbol& f) const {
  require_disc(f);
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(size());
  for (const SymbolTerm& t : f.terms()) {
    const int alpha = t.a[0], beta = t.b[0];
    const int q = alpha - beta;
    if (std::abs(q) > D_) continue;
    const int m = std::abs(q);
    const int E = (alpha + beta + m) / 2;
    for (int k = 0; k < sector_size(q); ++k)
      c[position(q, k)] += t.coeff * radial_single(m, k, E);
  }
  return c;
}

double TruncatedBasis::multiplied_norm_sq(const Symbol& f, int pos) const {
  require_disc(f);
  const Symbol g = f.conj() * f;
  const int q = index_[pos].q, j = index_[pos].j;
  const int m = std::abs(q);
  complexd acc = 0.0;
  for (const SymbolTerm& t : g.terms()) {
    if (t.a[0] != t.b[0]) continue;  // off-charge terms integrate to zero
    acc += t.coeff * radial_pair(m, j, m, j, t.a[0] + m);
  }
  return acc.real();
}

std::uint64_t TruncatedBasis::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 1099511628211ULL;
    }
  };
  mix(std::uint64_t(D_));
  std::uint64_t g;
  static_assert(sizeof(double) == sizeof(std::uint64_t));
  std::memcpy(&g, &gamma_, 8);
  mix(g);
  mix(std::uint64_t(size()));
  return h;
}

// ----------------------------------------------------------------- builders

OperatorMatrix projection_matrix(std::shared_ptr<const TruncatedBasis> basis) {
  const int N = basis->size();
  OperatorMatrix op;
  op.basis = basis;
  op.mat = Eigen::MatrixXcd::Zero(N, N);
  for (int i = 0; i < N; ++i)
    if (basis->holomorphic(i)) op.mat(i, i) = 1.0;
  op.dropped = Eigen::VectorXd::Zero(N);
  return op;
}

OperatorMatrix multiplication_matrix(std::shared_ptr<const TruncatedBasis> basis,
                                     const Symbol& f) {
  require_disc(f);
  const int N = basis->size();
  const int D = basis->degree_cap();
  OperatorMatrix op;
  op.basis = basis;
  op.mat = Eigen::MatrixXcd::Zero(N, N);
  for (const SymbolTerm& t : f.terms()) {
    const int alpha = t.a[0], beta = t.b[0];
    for (int col = 0; col < N; ++col) {
      const BasisIndex& bi = basis->index()[col];
      const int qp = bi.q + alpha - beta;
      if (std::abs(qp) > D) continue;
      const int m1 = std::abs(bi.q), m2 = std::abs(qp);
      const int E = (alpha + beta + m1 + m2) / 2;
      for (int k = 0; k < basis->sector_size(qp); ++k)
        op.mat(basis->position(qp, k), col) +=
            t.coeff * basis->radial_pair(m1, bi.j, m2, k, E);
    }
  }
  op.dropped.resize(N);
  for (int col = 0; col < N; ++col)
    op.dropped[col] = clamp0(basis->multiplied_norm_sq(f, col) -
                             op.mat.col(col).squaredNorm());
  return op;
}

OperatorMatrix hankel_matrix(std::shared_ptr<const TruncatedBasis> basis,
                             const Symbol& f) {
  require_disc(f);
  const int N = basis->size();
  const int D = basis->degree_cap();
  OperatorMatrix op;
  op.basis = basis;
  op.domain = DomainKind::Holomorphic;
  op.mat = Eigen::MatrixXcd::Zero(N, D + 1);
  for (const SymbolTerm& t : f.terms()) {
    const int alpha = t.a[0], beta = t.b[0];
    for (int a = 0; a <= D; ++a) {
      const int qp = a + alpha - beta;
      if (std::abs(qp) > D) continue;
      const int m2 = std::abs(qp);
      const int E = (alpha + beta + a + m2) / 2;
      for (int k = 0; k < basis->sector_size(qp); ++k)
        op.mat(basis->position(qp, k), a) +=
            t.coeff * basis->radial_pair(a, 0, m2, k, E);
    }
  }
  op.dropped.resize(D + 1);
  for (int a = 0; a <= D; ++a)
    op.dropped[a] = clamp0(basis->multiplied_norm_sq(f, basis->position(a, 0)) -
                           op.mat.col(a).squaredNorm());
  // (I - P): remove the holomorphic component of every image
  for (int r = 0; r < N; ++r)
    if (basis->holomorphic(r)) op.mat.row(r).setZero();
  return op;
}

OperatorMatrix commutator_matrix(std::shared_ptr<const TruncatedBasis> basis,
                                 const Symbol& f) {
  OperatorMatrix op = multiplication_matrix(basis, f);
  const int N = basis->size();
  for (int c = 0; c < N; ++c) {
    const double pc = basis->holomorphic(c) ? 1.0 : 0.0;
    for (int r = 0; r < N; ++r) {
      const double pr = basis->holomorphic(r) ? 1.0 : 0.0;
      op.mat(r, c) *= pc - pr;  // MP - PM eats everything with pc == pr
    }
  }
  return op;
}

Eigen::MatrixXcd embed_full(const OperatorMatrix& op) {
  if (op.domain == DomainKind::Full) return op.mat;
  const int N = op.basis->size();
  Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(N, N);
  for (int a = 0; a <= op.basis->degree_cap(); ++a)
    full.col(op.basis->position(a, 0)) = op.mat.col(a);
  return full;
}

// ------------------------------------------------------------------ spectra

SingularSpectrum singular_values(const Eigen::MatrixXcd& T) {
  SingularSpectrum out;
  out.source_dim = int(std::min(T.rows(), T.cols()));
  if (out.source_dim == 0) return out;
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(T);
  if (svd.info() != Eigen::Success) {
    std::ofstream dump("svd_failure_dump.bin", std::ios::binary);
    for (int c = 0; c < T.cols(); ++c)
      for (int r = 0; r < T.rows(); ++r) {
        const double re = T(r, c).real(), im = T(r, c).imag();
        dump.write(reinterpret_cast<const char*>(&re), 8);
        dump.write(reinterpret_cast<const char*>(&im), 8);
      }
    throw std::runtime_error(
        "singular_values: SVD did not converge on a " +
        std::to_string(T.rows()) + "x" + std::to_string(T.cols()) +
        " matrix; entries dumped to svd_failure_dump.bin");
  }
  const auto& s = svd.singularValues();
  out.s.assign(s.data(), s.data() + s.size());
  return out;
}

SingularSpectrum singular_values(const OperatorMatrix& T) {
  return singular_values(T.mat);
}

double schatten_norm(const SingularSpectrum& spec, double p) {
  if (!(p > 0.0)) throw std::domain_error("schatten_norm: p > 0");
  double acc = 0.0;
  for (double s : spec.s) acc += std::pow(s, p);
  return std::pow(acc, 1.0 / p);
}

double schatten_norm(const Eigen::MatrixXcd& T, double p) {
  return schatten_norm(singular_values(T), p);
}

double schatten_norm(const OperatorMatrix& T, double p) {
  return schatten_norm(T.mat, p);
}

EntrywiseBound entrywise_schatten_check(const Eigen::MatrixXcd& T, double p) {
  if (!(p > 0.0) || p > 2.0)
    throw std::domain_error("entrywise bound requires 0 < p <= 2");
  const SingularSpectrum spec = singular_values(T);
  double lhs = 0.0;
  for (double s : spec.s) lhs += std::pow(s, p);
  double rhs = 0.0;
  for (int c = 0; c < T.cols(); ++c)
    for (int r = 0; r < T.rows(); ++r) {
      const double a = std::abs(T(r, c));
      if (a > 0.0) rhs += std::pow(a, p);
    }
  EntrywiseBound out;
  out.lhs = lhs;
  out.rhs = rhs;
  out.slack = rhs - lhs;
  out.pass = out.slack >= -1e-10;
  return out;
}

SingularSpectrum hankel_zbar_spectrum_exact(double gamma, int count) {
  if (!(gamma > -1.0)) throw std::domain_error("gamma > -1");
  SingularSpectrum out;
  out.source_dim = count;
  out.s.reserve(count);
  for (int a = 0; a < count; ++a)
    out.s.push_back(
        std::sqrt((1.0 + gamma) / ((a + 1.0 + gamma) * (a + 2.0 + gamma))));
  return out;
}

void export_matrix(const OperatorMatrix& op, const std::string& base_path) {
  {
    std::ofstream bin(base_path + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("export_matrix: cannot open " + base_path + ".bin");
    for (int c = 0; c < op.mat.cols(); ++c)
      for (int r = 0; r < op.mat.rows(); ++r) {
        const double re = op.mat(r, c).real(), im = op.mat(r, c).imag();
        bin.write(reinterpret_cast<const char*>(&re), 8);
        bin.write(reinterpret_cast<const char*>(&im), 8);
      }
  }
  nlohmann::ordered_json j;
  j["rows"] = op.mat.rows();
  j["cols"] = op.mat.cols();
  char hex[32];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(op.basis->hash()));
  j["basis_hash"] = hex;
  j["gamma"] = op.basis->gamma();
  j["D"] = op.basis->degree_cap();
  j["domain"] = op.domain == DomainKind::Full ? "full" : "holomorphic";
  j["layout"] = "column-major complex128 (re, im) pairs, little-endian";
  std::ofstream hdr(base_path + ".json");
  if (!hdr) throw std::runtime_error("export_matrix: cannot open " + base_path + ".json");
  hdr << j.dump(2) << "\n";
}

}  // namespace bergman
