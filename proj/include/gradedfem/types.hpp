#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace gradedfem {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

/// Raised when an operation is called with arguments violating its contract.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a geometric construction is degenerate or inconsistent.
class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a linear solve breaks down or fails to converge.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

} // namespace gradedfem
