#pragma once

#include "medbounds/bounds.hpp"
#include "medbounds/categorical.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace medbounds {

enum class BootstrapWeights {
    Exponential,  // i.i.d. Exponential(1) multipliers
    Constant,     // every multiplier is 1; replicates reproduce the full-sample fit
};

struct BootstrapOptions {
    std::size_t replicates = 1000;
    /// Confidence level; the interval uses the (1 - level)/2 and (1 + level)/2 quantiles.
    double level = 0.95;
    std::uint64_t seed = 1;
    /// 0 picks MEDBOUNDS_THREADS or the hardware concurrency.
    std::size_t threads = 0;
    BootstrapWeights weights = BootstrapWeights::Exponential;
    double max_failure_fraction = 0.05;
};

struct BootstrapReplicate {
    double lower = 0.0;
    double upper = 0.0;
    bool failed = false;
};

struct BootstrapResult {
    std::vector<BootstrapReplicate> replicates;
    double ci_lower = 0.0;
    double ci_upper = 0.0;
    double level = 0.95;
    std::uint64_t seed = 0;
    std::size_t failures = 0;

    bool operator==(const BootstrapResult&) const = default;
};

bool operator==(const BootstrapReplicate& lhs, const BootstrapReplicate& rhs);

using DatasetEstimator = std::function<IntervalEstimate(const Dataset&)>;

/// Each replicate multiplies the record weights by i.i.d. draws from its own
/// sub-seed and re-runs the estimator. Replicates that throw are recorded as
/// failed and dropped; more than max_failure_fraction of them throws
/// EstimatorFailed. The result does not depend on the thread count.
BootstrapResult weighted_bootstrap_ci(const Dataset& data, const DatasetEstimator& estimator,
                                      const BootstrapOptions& options);

using MultiDatasetEstimator = std::function<std::vector<IntervalEstimate>(const Dataset&)>;

/// Same resampling for several targets computed from each replicate; one
/// result per target. A replicate fails for every target at once.
std::vector<BootstrapResult> weighted_bootstrap_multi(const Dataset& data,
                                                      const MultiDatasetEstimator& estimator,
                                                      std::size_t targets,
                                                      const BootstrapOptions& options);

/// Type-7 sample quantile of unsorted values.
double sample_quantile(std::vector<double> values, double q);

/// Thread count from MEDBOUNDS_THREADS, else the hardware concurrency (at least 1).
std::size_t default_thread_count();

}  // namespace medbounds
