#pragma once

#include <array>

namespace airway {

/// Symmetric 3x3 matrix stored as its six distinct entries.
struct Sym3 {
  double xx = 0, yy = 0, zz = 0, xy = 0, xz = 0, yz = 0;

  double frobenius() const;
};

using Mat3 = std::array<std::array<double, 3>, 3>;

/// Eigenvalues ordered |l1| <= |l2| <= |l3| with structureness
/// s = sqrt(l1^2 + l2^2 + l3^2).
struct EigenTriple {
  double l1 = 0, l2 = 0, l3 = 0;
  double s = 0;
};

struct EigenSystem {
  EigenTriple values;
  /// vectors[k] is the unit eigenvector for the k-th ordered eigenvalue.
  std::array<std::array<double, 3>, 3> vectors{};
};

/// Closed-form eigenvalues (trigonometric solution of the characteristic
/// cubic) of a symmetric matrix, ordered by absolute value.
EigenTriple eigenvalues_sym3(const Sym3& a);

/// Eigenvalues as above plus an orthonormal eigenbasis. Eigenvectors come
/// from the null space of A - lambda I for the best separated eigenvalue,
/// then a 2x2 problem in its orthogonal complement, so the basis stays
/// orthonormal for repeated eigenvalues.
EigenSystem eig_sym3(const Sym3& a);

/// Same, for a full matrix; throws ValidationError when |a_ij - a_ji| > 1e-12.
EigenSystem eig_sym3(const Mat3& a);

}  // namespace airway
