#pragma once

#include <Eigen/Dense>

namespace empc {

/// Half-space intersection { x : Z x <= z }.  Zero rows means the whole space.
struct Polyhedron {
    Eigen::MatrixXd Z;
    Eigen::VectorXd z;

    Eigen::Index rows() const { return Z.rows(); }
    Eigen::Index dim() const { return Z.cols(); }
};

bool contains(const Polyhedron& poly, const Eigen::VectorXd& x, double tol = 1e-9);

/// Largest violation max_i (Z_i x - z_i); negative strictly inside.
double max_violation(const Polyhedron& poly, const Eigen::VectorXd& x);

/// Scales every row to unit Euclidean norm (rows below `tol` in norm are left
/// untouched so that vacuous/contradictory zero rows stay detectable).
Polyhedron normalized_rows(const Polyhedron& poly, double tol = 1e-12);

struct ChebyshevResult {
    Eigen::VectorXd center;
    /// Radius of the largest inscribed ball: > 0 full-dimensional, == 0
    /// degenerate (nonempty but flat), < 0 empty, +infinity unbounded.
    double radius = 0.0;
};

ChebyshevResult chebyshev(const Polyhedron& poly);

/// Like chebyshev(), but guarantees a usable interior point for unbounded
/// sets by intersecting with the box |x_i| <= cap before locating the
/// center.  The returned radius still reports the uncapped value (+infinity
/// for unbounded sets).
ChebyshevResult chebyshev_interior(const Polyhedron& poly, double cap = 1e3);

/// Drops every redundant row (and all vacuous zero rows), keeping the set of
/// points identical.  Rows are normalized first; the scan order follows the
/// input row order, so the result is deterministic.  Throws if the set is
/// empty.
Polyhedron remove_redundant(const Polyhedron& poly);

}  // namespace empc
