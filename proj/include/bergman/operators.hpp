#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "bergman/quadrature.hpp"
#include "bergman/symbol.hpp"

// Finite matrix models on the disc (n = 1).  L^2(D, dv_gamma) splits into
// charge sectors q = a - b; within sector q the radial parts live against the
// weight u^|q| (1 - u)^gamma, so the orthonormal basis is
//
//   e_{q,j}(z) = chi_q(z) R_j^{(|q|)}(|z|^2),   chi_q = z^q or conj(z)^|q|,
//
// with R_j the orthonormal shifted-Jacobi family.  Building the basis from
// the three-term recurrence instead of literal Gram-Schmidt on monomials is
// the same object in exact arithmetic but stays stable far beyond the degree
// where the moment Gram matrix becomes numerically singular.  All matrix
// entries are exact Gauss-Jacobi sums of polynomial integrands.

namespace bergman {

struct BasisIndex {
  int q;  // charge a - b
  int j;  // radial degree within the sector
};

class TruncatedBasis {
 public:
  // Degree cap D >= 1 boxes the monomials z^a conj(z)^b to 0 <= a, b <= D.
  TruncatedBasis(int D, double gamma);

  int degree_cap() const { return D_; }
  double gamma() const { return gamma_; }
  int size() const { return int(index_.size()); }
  const std::vector<BasisIndex>& index() const { return index_; }
  int sector_size(int q) const;
  // Position of e_{q,j} in the ordering (sector ascending, then degree);
  // -1 when outside the box.
  int position(int q, int j) const;
  bool holomorphic(int pos) const {
    return index_[pos].q >= 0 && index_[pos].j == 0;
  }
  // Monomial realization of e_{q,j} (bookkeeping; assembly never expands it).
  const Symbol& vector_symbol(int pos) const { return symbols_[pos]; }

  // <t e_{q,j}, e_{q',k}> for a single monomial term t = z^alpha conj(z)^beta
  // REQUIRES charge balance q' = q + alpha - beta; E = (alpha+beta+|q|+|q'|)/2.
  double radial_pair(int m1, int j, int m2, int k, int E) const;
  // <u^E, R_k^{(m)}> against the full sector measure; used for expansions.
  double radial_single(int m, int k, int E) const;

  // Coefficients <f, e_i> of a polynomial symbol in this basis.
  Eigen::VectorXcd expand(const Symbol& f) const;
  // Exact squared L^2 norm of M_f e_pos (no truncation), via the symbol
  // product conj(f) f.
  double multiplied_norm_sq(const Symbol& f, int pos) const;

  // Largest orthonormality defect seen by the independent validation rule.
  double orthonormality_defect() const { return defect_; }
  std::uint64_t hash() const;

 private:
  int D_;
  double gamma_;
  std::vector<BasisIndex> index_;
  std::vector<int> sector_offset_;  // per q + D
  std::vector<Symbol> symbols_;
  Rule1D rule_;                            // weight (1-u)^gamma, absorbed
  std::vector<Eigen::MatrixXd> phi_;       // per m: (D-m+1) x nodes values
  mutable std::vector<Eigen::VectorXd> upow_;  // cached node powers u^E
  double defect_ = 0.0;

  const Eigen::VectorXd& power(int E) const;
};

enum class DomainKind { Full, Holomorphic };

// Dense operator block.  Codomain is always the full basis; Hankel operators
// carry DomainKind::Holomorphic (their kernel contains the complement, so
// the omitted columns are identically zero).  `dropped` holds, per column,
// the exact L^2 mass of the image that fell outside the degree box.
struct OperatorMatrix {
  Eigen::MatrixXcd mat;
  std::shared_ptr<const TruncatedBasis> basis;
  DomainKind domain = DomainKind::Full;
  Eigen::VectorXd dropped;

  double max_dropped() const {
    return dropped.size() ? dropped.maxCoeff() : 0.0;
  }
};

OperatorMatrix projection_matrix(std::shared_ptr<const TruncatedBasis> basis);
OperatorMatrix multiplication_matrix(std::shared_ptr<const TruncatedBasis> basis,
                                     const Symbol& f);
// H_f = (I - P) M_f P restricted to its essential domain (the holomorphic
// vectors); columns are ordered by degree a = 0..D.
OperatorMatrix hankel_matrix(std::shared_ptr<const TruncatedBasis> basis,
                             const Symbol& f);
// [M_f, P] on the full box.
OperatorMatrix commutator_matrix(std::shared_ptr<const TruncatedBasis> basis,
                                 const Symbol& f);
// Zero-pad a holomorphic-domain operator into the full square matrix.
Eigen::MatrixXcd embed_full(const OperatorMatrix& op);

struct SingularSpectrum {
  std::vector<double> s;  // nonincreasing, >= 0
  int source_dim = 0;     // min(rows, cols) of the source matrix
};

SingularSpectrum singular_values(const Eigen::MatrixXcd& T);
SingularSpectrum singular_values(const OperatorMatrix& T);

double schatten_norm(const SingularSpectrum& spec, double p);
double schatten_norm(const Eigen::MatrixXcd& T, double p);
double schatten_norm(const OperatorMatrix& T, double p);

// Entrywise Schatten bound ||T||_p^p <= sum |T_jk|^p, valid for 0 < p <= 2.
struct EntrywiseBound {
  double lhs;    // ||T||_p^p
  double rhs;    // sum of |entries|^p
  double slack;  // rhs - lhs
  bool pass;     // slack >= -1e-10
};
EntrywiseBound entrywise_schatten_check(const Eigen::MatrixXcd& T, double p);

// Exact singular values of the rank-one-per-sector Hankel operator with
// symbol conj(z): s_a^2 = m_{a+1}/m_a - m_a/m_{a-1}
//                       = (1+gamma) / ((a+1+gamma)(a+2+gamma)).
SingularSpectrum hankel_zbar_spectrum_exact(double gamma, int count);

// base_path.bin: column-major (re, im) doubles; base_path.json: the header.
void export_matrix(const OperatorMatrix& op, const std::string& base_path);

}  // namespace bergman
