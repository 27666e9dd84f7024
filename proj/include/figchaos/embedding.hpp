#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "figchaos/types.hpp"

namespace figchaos
{

struct EmbeddingConfig {
    std::size_t delay = 1;      // T, in samples
    std::size_t dimension = 1;  // m
};

/// Materialized delay-coordinate point cloud: point i component j equals
/// source[i + j * delay], count = source_length - (m - 1) * delay.
class DelayVectors {
  public:
    DelayVectors(std::vector<double> data, EmbeddingConfig config,
                 std::size_t source_length)
        : data_(std::move(data)), config_(config), source_length_(source_length)
    {
    }

    std::size_t size() const { return data_.size() / config_.dimension; }
    std::size_t dimension() const { return config_.dimension; }
    std::size_t delay() const { return config_.delay; }
    std::size_t source_length() const { return source_length_; }
    const EmbeddingConfig &config() const { return config_; }

    std::span<const double> point(std::size_t i) const
    {
        return {data_.data() + i * config_.dimension, config_.dimension};
    }

    double coord(std::size_t i, std::size_t j) const
    {
        return data_[i * config_.dimension + j];
    }

  private:
    std::vector<double> data_;  // row-major, size() x dimension
    EmbeddingConfig config_;
    std::size_t source_length_;
};

inline DelayVectors embed(std::span<const double> series, EmbeddingConfig config)
{
    require(config.delay >= 1, "embedding delay must be >= 1");
    require(config.dimension >= 1, "embedding dimension must be >= 1");
    const std::size_t span = (config.dimension - 1) * config.delay;
    if (series.size() < span + 1) {
        throw SeriesTooShortError(series.size(), span + 1);
    }
    const std::size_t count = series.size() - span;
    std::vector<double> data(count * config.dimension);
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t j = 0; j < config.dimension; ++j) {
            data[i * config.dimension + j] = series[i + j * config.delay];
        }
    }
    return DelayVectors(std::move(data), config, series.size());
}

inline DelayVectors embed(const TimeSeries &series, EmbeddingConfig config)
{
    return embed(std::span<const double>(series.values), config);
}

} // namespace figchaos
