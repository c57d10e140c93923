#include "medbounds/categorical.hpp"

#include "medbounds/errors.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <utility>

namespace medbounds {

CategoricalCodec::CategoricalCodec(std::string name, std::vector<std::string> levels)
    : name_(std::move(name)), levels_(std::move(levels)) {
    require(!levels_.empty(), ErrorCode::InvalidArgument,
            "variable '" + name_ + "' has no levels");
    std::set<std::string> seen(levels_.begin(), levels_.end());
    require(seen.size() == levels_.size(), ErrorCode::InvalidArgument,
            "variable '" + name_ + "' has duplicate levels");
}

std::optional<std::size_t> CategoricalCodec::index_of(std::string_view label) const {
    for (std::size_t i = 0; i < levels_.size(); ++i) {
        if (levels_[i] == label) return i;
    }
    return std::nullopt;
}

CategoricalCodec CategoricalCodec::numbered(std::string name, std::size_t k) {
    std::vector<std::string> levels;
    levels.reserve(k);
    for (std::size_t i = 0; i < k; ++i) levels.push_back(std::to_string(i));
    return CategoricalCodec(std::move(name), std::move(levels));
}

CategoricalCodec make_exposure_codec(std::string name, std::string baseline_label,
                                     std::string comparison_label) {
    return CategoricalCodec(std::move(name),
                            {std::move(baseline_label), std::move(comparison_label)});
}

OutcomeCodec::OutcomeCodec(CategoricalCodec codec, std::vector<double> values)
    : codec_(std::move(codec)), values_(std::move(values)) {
    require(values_.size() == codec_.size(), ErrorCode::InvalidArgument,
            "outcome '" + codec_.name() + "' needs one support value per level");
    for (double v : values_) {
        require(std::isfinite(v), ErrorCode::InvalidArgument,
                "outcome '" + codec_.name() + "' has a non-finite support value");
    }
}

OutcomeCodec OutcomeCodec::binary(std::string name) {
    return OutcomeCodec(CategoricalCodec(std::move(name), {"0", "1"}), {0.0, 1.0});
}

OutcomeCodec OutcomeCodec::from_values(std::string name, std::vector<double> values) {
    std::vector<std::string> labels;
    labels.reserve(values.size());
    for (double v : values) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        labels.emplace_back(buf);
    }
    return OutcomeCodec(CategoricalCodec(std::move(name), std::move(labels)),
                        std::move(values));
}

ProductCodec::ProductCodec(std::vector<CategoricalCodec> components)
    : components_(std::move(components)) {
    size_ = 1;
    for (const auto& c : components_) size_ *= c.size();
}

std::vector<std::size_t> ProductCodec::component_sizes() const {
    std::vector<std::size_t> sizes;
    sizes.reserve(components_.size());
    for (const auto& c : components_) sizes.push_back(c.size());
    return sizes;
}

std::size_t ProductCodec::compose(const std::vector<std::size_t>& parts) const {
    return compose_index(component_sizes(), parts);
}

std::vector<std::size_t> ProductCodec::decompose(std::size_t index) const {
    return decompose_index(component_sizes(), index);
}

std::string ProductCodec::label(std::size_t index) const {
    if (components_.empty()) return "";
    auto parts = decompose(index);
    std::string out;
    for (std::size_t j = 0; j < parts.size(); ++j) {
        if (j) out += '|';
        out += components_[j].label(parts[j]);
    }
    return out;
}

bool ProductCodec::all_binary() const {
    if (components_.empty()) return false;
    for (const auto& c : components_) {
        if (c.size() != 2) return false;
    }
    return true;
}

std::size_t compose_index(const std::vector<std::size_t>& sizes,
                          const std::vector<std::size_t>& parts) {
    require(parts.size() == sizes.size(), ErrorCode::InvalidArgument,
            "component count mismatch");
    std::size_t index = 0;
    for (std::size_t j = 0; j < sizes.size(); ++j) {
        require(parts[j] < sizes[j], ErrorCode::InvalidArgument,
                "component level out of range");
        index = index * sizes[j] + parts[j];
    }
    return index;
}

std::vector<std::size_t> decompose_index(const std::vector<std::size_t>& sizes,
                                         std::size_t index) {
    std::vector<std::size_t> parts(sizes.size());
    for (std::size_t j = sizes.size(); j-- > 0;) {
        parts[j] = index % sizes[j];
        index /= sizes[j];
    }
    require(index == 0, ErrorCode::InvalidArgument, "joint index out of range");
    return parts;
}

Dataset::Dataset(DatasetCodecs codecs, std::vector<Record> records,
                 std::vector<double> weights)
    : codecs_(std::move(codecs)), records_(std::move(records)), weights_(std::move(weights)) {
    require(codecs_.exposure.size() == 2, ErrorCode::InvalidArgument,
            "exposure must have exactly two levels");
    require(codecs_.mediator.size() >= 1 && codecs_.outcome.size() >= 1,
            ErrorCode::InvalidArgument, "mediator and outcome need levels");
    if (weights_.empty()) weights_.assign(records_.size(), 1.0);
    require(weights_.size() == records_.size(), ErrorCode::InvalidArgument,
            "one weight per record required");
    total_weight_ = 0.0;
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const Record& rec = records_[i];
        require(rec.c < codecs_.covariates.size() && rec.a < 2 &&
                    rec.r < codecs_.confounders.size() && rec.m < codecs_.mediator.size() &&
                    rec.y < codecs_.outcome.size(),
                ErrorCode::InvalidArgument,
                "record " + std::to_string(i) + " has an index outside its codec");
        require(std::isfinite(weights_[i]) && weights_[i] >= 0.0, ErrorCode::InvalidArgument,
                "record " + std::to_string(i) + " has a negative or non-finite weight");
        total_weight_ += weights_[i];
    }
    require(total_weight_ > 0.0, ErrorCode::InvalidArgument, "dataset has zero total weight");
}

Dataset Dataset::reweighted(const std::vector<double>& factors) const {
    require(factors.size() == records_.size(), ErrorCode::InvalidArgument,
            "one reweighting factor per record required");
    std::vector<double> w(weights_.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = weights_[i] * factors[i];
    return Dataset(codecs_, records_, std::move(w));
}

}  // namespace medbounds
