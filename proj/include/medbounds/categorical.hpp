#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace medbounds {

/// Ordered mapping between raw labels and level indices 0..k-1.
class CategoricalCodec {
public:
    CategoricalCodec() = default;
    CategoricalCodec(std::string name, std::vector<std::string> levels);

    const std::string& name() const noexcept { return name_; }
    const std::vector<std::string>& levels() const noexcept { return levels_; }
    std::size_t size() const noexcept { return levels_.size(); }

    std::optional<std::size_t> index_of(std::string_view label) const;
    const std::string& label(std::size_t index) const { return levels_.at(index); }

    /// Levels named "0", "1", ..., k-1.
    static CategoricalCodec numbered(std::string name, std::size_t k);

private:
    std::string name_;
    std::vector<std::string> levels_;
};

/// The exposure always has two levels: index 0 is the baseline a*, index 1 the
/// comparison a. Which raw label plays which role is supplied by the caller.
inline constexpr std::size_t kBaseline = 0;
inline constexpr std::size_t kComparison = 1;

CategoricalCodec make_exposure_codec(std::string name, std::string baseline_label,
                                     std::string comparison_label);

/// Outcome codec: labels plus the numeric value each level stands for.
class OutcomeCodec {
public:
    OutcomeCodec() = default;
    OutcomeCodec(CategoricalCodec codec, std::vector<double> values);

    const CategoricalCodec& codec() const noexcept { return codec_; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }

    static OutcomeCodec binary(std::string name = "Y");
    static OutcomeCodec from_values(std::string name, std::vector<double> values);

private:
    CategoricalCodec codec_;
    std::vector<double> values_;
};

/// A variable assembled from several categorical components (several R columns,
/// or a covariate pattern). The joint index is row-major with the last
/// component varying fastest. An empty product has exactly one level.
class ProductCodec {
public:
    ProductCodec() = default;
    explicit ProductCodec(std::vector<CategoricalCodec> components);

    const std::vector<CategoricalCodec>& components() const noexcept { return components_; }
    std::vector<std::size_t> component_sizes() const;
    std::size_t size() const noexcept { return size_; }

    std::size_t compose(const std::vector<std::size_t>& parts) const;
    std::vector<std::size_t> decompose(std::size_t index) const;
    std::string label(std::size_t index) const;

    bool all_binary() const;

private:
    std::vector<CategoricalCodec> components_;
    std::size_t size_ = 1;
};

/// Joint index for a list of component sizes, last component fastest.
std::size_t compose_index(const std::vector<std::size_t>& sizes,
                          const std::vector<std::size_t>& parts);
std::vector<std::size_t> decompose_index(const std::vector<std::size_t>& sizes,
                                         std::size_t index);

struct Record {
    std::size_t c = 0;
    std::size_t a = 0;
    std::size_t r = 0;
    std::size_t m = 0;
    std::size_t y = 0;
};

struct DatasetCodecs {
    ProductCodec covariates;
    CategoricalCodec exposure;
    ProductCodec confounders;
    CategoricalCodec mediator;
    OutcomeCodec outcome;
};

/// Weighted observation records (C, A, R, M, Y). Immutable once built.
class Dataset {
public:
    Dataset(DatasetCodecs codecs, std::vector<Record> records,
            std::vector<double> weights = {});

    const DatasetCodecs& codecs() const noexcept { return codecs_; }
    const std::vector<Record>& records() const noexcept { return records_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    std::size_t size() const noexcept { return records_.size(); }
    double total_weight() const noexcept { return total_weight_; }

    /// Same records with every weight multiplied by the matching factor.
    Dataset reweighted(const std::vector<double>& factors) const;

private:
    DatasetCodecs codecs_;
    std::vector<Record> records_;
    std::vector<double> weights_;
    double total_weight_ = 0.0;
};

}  // namespace medbounds
