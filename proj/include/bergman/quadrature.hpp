#pragma once

#include <vector>

// One-dimensional Gauss rules on [0, 1] and three-term recurrences for the
// orthonormal polynomial families used throughout: weight
// u^m (1 - u)^gamma on [0, 1] (shifted Jacobi).  Nodes come from the
// Golub-Welsch eigenproblem of the recurrence.

namespace bergman {

struct Rule1D {
  std::vector<double> x;
  std::vector<double> w;
};

// Monic three-term recurrence p_{k+1} = (u - a[k]) p_k - b[k] p_{k-1} on
// [0, 1]; b[0] stores the total mass mu0 = int w(u) du.
struct OrthoRecurrence {
  std::vector<double> a;
  std::vector<double> b;
};

// Recurrence of length `count` for weight u^m (1 - u)^gamma on [0, 1].
OrthoRecurrence jacobi_recurrence01(double gamma, double m, int count);

// Gauss rule with the weight absorbed: sum w_i f(x_i) = int f(u) w(u) du
// exactly for polynomial f of degree <= 2 nodes - 1.
Rule1D gauss_rule(const OrthoRecurrence& rec, int nodes);

// Gauss-Legendre on [a, b] (weight 1).
Rule1D gauss_legendre(int nodes, double a = 0.0, double b = 1.0);

// Values phi_0(u)..phi_{maxdeg}(u) of the orthonormal family of `rec`
// (unit L^2(w du) norm, positive leading coefficient).
void eval_orthonormal(const OrthoRecurrence& rec, int maxdeg, double u,
                      double* out);

}  // namespace bergman
