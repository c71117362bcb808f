#include "mbfs/knn/digamma.hpp"

#include <cmath>
#include <string>

#include "mbfs/error.hpp"

namespace mbfs::knn {

double digamma(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw Error(ErrorKind::invalid_argument, "digamma needs a positive finite argument, got " + std::to_string(x));
    }
    double result = 0.0;
    while (x < 10.0) {
        result -= 1.0 / x;
        x += 1.0;
    }
    // Asymptotic expansion in 1/x^2 (Bernoulli numbers B2..B10).
    const double f = 1.0 / (x * x);
    const double tail = f * (1.0 / 12 - f * (1.0 / 120 - f * (1.0 / 252 - f * (1.0 / 240 - f * (1.0 / 132)))));
    return result + std::log(x) - 0.5 / x - tail;
}

DigammaTable::DigammaTable(std::size_t max_arg) : m_values(max_arg + 1, 0.0) {
    for (std::size_t m = 1; m <= max_arg; ++m) m_values[m] = digamma(static_cast<double>(m));
}

double DigammaTable::operator()(std::size_t m) const {
    if (m == 0 || m >= m_values.size()) {
        throw Error(ErrorKind::invalid_argument, "digamma table lookup out of range: " + std::to_string(m));
    }
    return m_values[m];
}

}  // namespace mbfs::knn
