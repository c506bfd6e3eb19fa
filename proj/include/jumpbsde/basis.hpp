#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace jumpbsde {

// Regression basis over the state (and optionally the mark). Features are
// evaluated column-wise; least squares goes through a rank-revealing QR so
// collinear or empty columns degrade gracefully instead of blowing up.
struct Basis {
    std::vector<std::function<double(double)>> fns;
    std::string name;

    int size() const { return static_cast<int>(fns.size()); }
    Eigen::VectorXd eval(double x) const;
    Eigen::MatrixXd design(const std::vector<double>& xs) const;
};

// 1, x, ..., x^degree
Basis polynomial_basis(int degree);
// indicator of each listed state value (within tol); for finite state spaces
Basis indicator_basis(std::vector<double> states, double tol = 1e-9);
// indicators of [edges[i], edges[i+1]) with the last interval closed
Basis interval_basis(std::vector<double> edges);

// Tensor product (x, e) -> bx(x) * be(e), flattened row-major over bx.
struct Basis2 {
    Basis state;
    Basis mark;

    int size() const { return state.size() * mark.size(); }
    Eigen::VectorXd eval(double x, double e) const;
};

struct LsFit {
    Eigen::VectorXd coeffs;
    int rank = 0;
    int dropped_columns = 0;  // columns with no support in the sample

    double operator()(const Eigen::VectorXd& features) const { return features.dot(coeffs); }
};

// Minimum-norm least squares of y on the rows of X (rank-revealing complete
// orthogonal decomposition; deficient directions get zero weight).
LsFit least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

}  // namespace jumpbsde
