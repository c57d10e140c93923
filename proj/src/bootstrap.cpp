#include "medbounds/bootstrap.hpp"

#include "medbounds/errors.hpp"
#include "medbounds/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

namespace medbounds {

bool operator==(const BootstrapReplicate& lhs, const BootstrapReplicate& rhs) {
    return lhs.failed == rhs.failed && lhs.lower == rhs.lower && lhs.upper == rhs.upper;
}

double sample_quantile(std::vector<double> values, double q) {
    require(!values.empty(), ErrorCode::InvalidArgument, "quantile of an empty sample");
    require(q >= 0.0 && q <= 1.0, ErrorCode::InvalidArgument, "quantile level outside [0, 1]");
    std::sort(values.begin(), values.end());
    const double h = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::size_t default_thread_count() {
    if (const char* env = std::getenv("MEDBOUNDS_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<std::size_t>(v);
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<BootstrapResult> weighted_bootstrap_multi(const Dataset& data,
                                                      const MultiDatasetEstimator& estimator,
                                                      std::size_t targets,
                                                      const BootstrapOptions& options) {
    require(options.replicates >= 1, ErrorCode::InvalidArgument, "need at least one replicate");
    require(targets >= 1, ErrorCode::InvalidArgument, "need at least one bootstrap target");
    require(options.level > 0.0 && options.level < 1.0, ErrorCode::InvalidArgument,
            "level must lie strictly between 0 and 1");

    const std::size_t b = options.replicates;
    std::vector<std::vector<BootstrapReplicate>> reps(targets, std::vector<BootstrapReplicate>(b));
    std::atomic<std::size_t> next{0};
    std::exception_ptr internal_error;
    std::mutex error_mutex;

    auto work = [&] {
        for (std::size_t i = next++; i < b; i = next++) {
            std::vector<double> factors(data.size(), 1.0);
            if (options.weights == BootstrapWeights::Exponential) {
                Rng rng = Rng::substream(options.seed, i);
                for (double& f : factors) f = rng.exponential();
            }
            try {
                const std::vector<IntervalEstimate> est = estimator(data.reweighted(factors));
                require(est.size() == targets, ErrorCode::Internal,
                        "bootstrap estimator returned the wrong number of targets");
                for (std::size_t t = 0; t < targets; ++t) {
                    reps[t][i] = {est[t].lower, est[t].upper, false};
                }
            } catch (const Error& e) {
                if (e.code() == ErrorCode::Internal) {
                    std::lock_guard lock(error_mutex);
                    if (!internal_error) internal_error = std::current_exception();
                }
                for (std::size_t t = 0; t < targets; ++t) reps[t][i] = {0.0, 0.0, true};
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!internal_error) internal_error = std::current_exception();
                for (std::size_t t = 0; t < targets; ++t) reps[t][i] = {0.0, 0.0, true};
            }
        }
    };

    const std::size_t threads =
        std::min(b, options.threads > 0 ? options.threads : default_thread_count());
    if (threads <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
    }
    if (internal_error) std::rethrow_exception(internal_error);

    std::size_t failures = 0;
    std::size_t first_failure = b;
    for (std::size_t i = 0; i < b; ++i) {
        if (reps[0][i].failed) {
            ++failures;
            first_failure = std::min(first_failure, i);
        }
    }
    const double allowed = options.max_failure_fraction * static_cast<double>(b);
    if (failures == b || static_cast<double>(failures) > allowed) {
        fail(ErrorCode::EstimatorFailed,
             std::to_string(failures) + " of " + std::to_string(b) +
                 " bootstrap replicates failed (first failing replicate index " +
                 std::to_string(first_failure) + ")");
    }

    const double alpha = 1.0 - options.level;
    std::vector<BootstrapResult> results;
    for (std::size_t t = 0; t < targets; ++t) {
        BootstrapResult out;
        out.level = options.level;
        out.seed = options.seed;
        out.failures = failures;
        std::vector<double> lowers, uppers;
        for (const auto& r : reps[t]) {
            if (r.failed) continue;
            lowers.push_back(r.lower);
            uppers.push_back(r.upper);
        }
        out.replicates = std::move(reps[t]);
        out.ci_lower = sample_quantile(lowers, alpha / 2.0);
        out.ci_upper = std::max(out.ci_lower, sample_quantile(uppers, 1.0 - alpha / 2.0));
        results.push_back(std::move(out));
    }
    return results;
}

BootstrapResult weighted_bootstrap_ci(const Dataset& data, const DatasetEstimator& estimator,
                                      const BootstrapOptions& options) {
    auto wrapped = [&](const Dataset& d) { return std::vector<IntervalEstimate>{estimator(d)}; };
    return std::move(weighted_bootstrap_multi(data, wrapped, 1, options).front());
}

}  // namespace medbounds
