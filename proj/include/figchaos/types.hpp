#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace figchaos
{

/// Scalar sample path, optionally paired with the conditional volatility
/// path of the same length.
struct TimeSeries {
    std::vector<double> values;
    std::vector<double> volatility;  // empty, or one entry per value

    std::size_t size() const { return values.size(); }
    bool has_volatility() const { return !volatility.empty(); }
};

/// Generic (abscissa, ordinate) curve used by the estimators.
struct EstimatorCurve {
    std::vector<double> x;
    std::vector<double> y;
};

class NonNegativityError : public std::runtime_error {
  public:
    NonNegativityError(std::size_t k, double value)
        : std::runtime_error("ARCH(inf) weight lambda_" + std::to_string(k) +
                             " = " + std::to_string(value) +
                             " violates non-negativity"),
          offending_lag(k), weight(value)
    {
    }

    std::size_t offending_lag;
    double weight;
};

class SeriesTooShortError : public std::runtime_error {
  public:
    SeriesTooShortError(std::size_t length, std::size_t required)
        : std::runtime_error("series of length " + std::to_string(length) +
                             " is too short, need at least " +
                             std::to_string(required)),
          length(length), required(required)
    {
    }

    std::size_t length;
    std::size_t required;
};

class NoAdmissibleNeighborError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class DivergenceError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class DegenerateSeriesError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class InsufficientScalingRegionError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string &message)
{
    if (!condition) {
        throw std::invalid_argument(message);
    }
}

} // namespace figchaos
