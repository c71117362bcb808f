#pragma once

#include <cstddef>
#include <vector>

namespace mbfs::knn {

/// psi(x) for x > 0; absolute error below 1e-10 for x >= 1e-3.
/// Throws Error(invalid_argument) for x <= 0.
double digamma(double x);

// psi(1..max_arg), precomputed for the integer counts the estimators feed it.
class DigammaTable {
public:
    explicit DigammaTable(std::size_t max_arg);
    double operator()(std::size_t m) const;

private:
    std::vector<double> m_values;
};

}  // namespace mbfs::knn
