#include "medbounds/csv_ingest.hpp"

#include "medbounds/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_map>

namespace medbounds {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::optional<double> parse_number(const std::string& s) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || first == last || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::vector<std::string> infer_levels(const std::vector<std::string>& observed) {
    std::vector<std::string> levels(observed.begin(), observed.end());
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    const bool numeric = std::all_of(levels.begin(), levels.end(),
                                     [](const std::string& s) { return parse_number(s).has_value(); });
    if (numeric) {
        std::stable_sort(levels.begin(), levels.end(), [](const std::string& a, const std::string& b) {
            return *parse_number(a) < *parse_number(b);
        });
    }
    return levels;
}

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
            was_quoted = true;
        } else if (ch == ',') {
            out.push_back(was_quoted ? cur : trim(cur));
            cur.clear();
            was_quoted = false;
        } else {
            cur += ch;
        }
    }
    require(!quoted, ErrorCode::Parse, "unterminated quoted field");
    out.push_back(was_quoted ? cur : trim(cur));
    return out;
}

void validate_roles(const ColumnRoles& roles) {
    require(!roles.exposure.empty(), ErrorCode::Config, "no exposure column configured");
    require(!roles.mediator.empty(), ErrorCode::Config, "no mediator column configured");
    require(!roles.outcome.empty(), ErrorCode::Config, "no outcome column configured");
    std::set<std::string> seen;
    auto claim = [&](const std::string& name) {
        require(!name.empty(), ErrorCode::Config, "empty column name in role config");
        require(seen.insert(name).second, ErrorCode::Config,
                "column '" + name + "' is assigned more than one role");
    };
    for (const auto& c : roles.covariates) claim(c);
    claim(roles.exposure);
    for (const auto& r : roles.confounders) claim(r);
    claim(roles.mediator);
    claim(roles.outcome);
    if (roles.weight) claim(*roles.weight);
}

Dataset read_csv_dataset(std::istream& in, const IngestConfig& config) {
    validate_roles(config.roles);

    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorCode::Parse, "CSV input is empty");
    const std::vector<std::string> header = split_csv_line(line);
    std::unordered_map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col.emplace(header[i], i);
    auto column = [&](const std::string& name) {
        const auto it = col.find(name);
        if (it == col.end()) fail(ErrorCode::MissingColumn, "missing column '" + name + "'");
        return it->second;
    };

    // Raw cells per role column.
    std::vector<std::string> names;
    for (const auto& c : config.roles.covariates) names.push_back(c);
    names.push_back(config.roles.exposure);
    for (const auto& r : config.roles.confounders) names.push_back(r);
    names.push_back(config.roles.mediator);
    names.push_back(config.roles.outcome);
    if (config.roles.weight) names.push_back(*config.roles.weight);
    std::vector<std::size_t> idx;
    for (const auto& n : names) idx.push_back(column(n));

    std::vector<std::vector<std::string>> cells(names.size());
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        require(fields.size() == header.size(), ErrorCode::Parse,
                "line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                    " fields, header has " + std::to_string(header.size()));
        for (std::size_t k = 0; k < names.size(); ++k) cells[k].push_back(fields[idx[k]]);
    }
    const std::size_t n = cells.front().size();
    require(n > 0, ErrorCode::Parse, "CSV input has no data rows");

    auto codec_for = [&](std::size_t k) {
        const std::string& name = names[k];
        const auto it = config.levels.find(name);
        std::vector<std::string> levels =
            it != config.levels.end() ? it->second : infer_levels(cells[k]);
        try {
            return CategoricalCodec(name, std::move(levels));
        } catch (const Error& e) {
            fail(ErrorCode::Config, "column '" + name + "': " + e.what());
        }
    };
    auto encode = [&](const CategoricalCodec& codec, std::size_t k, std::size_t row) {
        const auto v = codec.index_of(cells[k][row]);
        if (!v) {
            fail(ErrorCode::Parse, "column '" + names[k] + "' row " + std::to_string(row + 1) +
                                       ": unknown level '" + cells[k][row] + "'");
        }
        return *v;
    };

    std::size_t k = 0;
    std::vector<CategoricalCodec> c_codecs, r_codecs;
    const std::size_t c_begin = k;
    for (std::size_t j = 0; j < config.roles.covariates.size(); ++j) c_codecs.push_back(codec_for(k++));
    const std::size_t a_col = k++;
    const std::size_t r_begin = k;
    for (std::size_t j = 0; j < config.roles.confounders.size(); ++j) r_codecs.push_back(codec_for(k++));
    const std::size_t m_col = k++;
    const std::size_t y_col = k++;
    const std::optional<std::size_t> w_col =
        config.roles.weight ? std::optional<std::size_t>(k) : std::nullopt;

    // Unspecified exposure labels default to the two observed levels in sorted order.
    std::string baseline = config.baseline_label, comparison = config.comparison_label;
    if (baseline.empty() || comparison.empty()) {
        const auto it = config.levels.find(config.roles.exposure);
        std::vector<std::string> seen =
            it != config.levels.end() ? it->second : infer_levels(cells[a_col]);
        std::erase_if(seen, [&](const std::string& v) { return v == baseline || v == comparison; });
        const std::size_t missing = (baseline.empty() ? 1 : 0) + (comparison.empty() ? 1 : 0);
        require(seen.size() == missing, ErrorCode::Config,
                "exposure column '" + config.roles.exposure +
                    "' needs explicit baseline and comparison labels unless it has exactly two levels");
        if (baseline.empty()) {
            baseline = seen.front();
            seen.erase(seen.begin());
        }
        if (comparison.empty()) comparison = seen.front();
    }
    require(baseline != comparison, ErrorCode::Config,
            "baseline and comparison exposure labels must differ");

    DatasetCodecs codecs;
    codecs.covariates = ProductCodec(c_codecs);
    codecs.exposure = make_exposure_codec(config.roles.exposure, baseline, comparison);
    codecs.confounders = ProductCodec(r_codecs);
    codecs.mediator = codec_for(m_col);

    std::vector<double> y_values = config.y_values;
    std::vector<double> y_cells(n);
    for (std::size_t row = 0; row < n; ++row) {
        const auto v = parse_number(cells[y_col][row]);
        require(v.has_value(), ErrorCode::Parse,
                "column '" + names[y_col] + "' row " + std::to_string(row + 1) + ": '" +
                    cells[y_col][row] + "' is not a number");
        y_cells[row] = *v;
    }
    if (y_values.empty()) {
        y_values = y_cells;
        std::sort(y_values.begin(), y_values.end());
        y_values.erase(std::unique(y_values.begin(), y_values.end()), y_values.end());
    }
    try {
        codecs.outcome = OutcomeCodec::from_values(config.roles.outcome, y_values);
    } catch (const Error& e) {
        fail(ErrorCode::Config, "outcome support: " + std::string(e.what()));
    }

    std::vector<Record> records(n);
    std::vector<double> weights;
    if (w_col) weights.resize(n);
    for (std::size_t row = 0; row < n; ++row) {
        Record& rec = records[row];
        std::vector<std::size_t> parts;
        for (std::size_t j = 0; j < c_codecs.size(); ++j) {
            parts.push_back(encode(c_codecs[j], c_begin + j, row));
        }
        rec.c = codecs.covariates.compose(parts);
        rec.a = encode(codecs.exposure, a_col, row);
        parts.clear();
        for (std::size_t j = 0; j < r_codecs.size(); ++j) {
            parts.push_back(encode(r_codecs[j], r_begin + j, row));
        }
        rec.r = codecs.confounders.compose(parts);
        rec.m = encode(codecs.mediator, m_col, row);
        const auto yi = std::find(y_values.begin(), y_values.end(), y_cells[row]);
        require(yi != y_values.end(), ErrorCode::Parse,
                "column '" + names[y_col] + "' row " + std::to_string(row + 1) + ": value '" +
                    cells[y_col][row] + "' is outside the declared outcome support");
        rec.y = static_cast<std::size_t>(yi - y_values.begin());
        if (w_col) {
            const auto w = parse_number(cells[*w_col][row]);
            require(w.has_value() && *w >= 0.0, ErrorCode::Parse,
                    "column '" + names[*w_col] + "' row " + std::to_string(row + 1) +
                        ": weight must be a nonnegative number");
            weights[row] = *w;
        }
    }
    try {
        return Dataset(std::move(codecs), std::move(records), std::move(weights));
    } catch (const Error& e) {
        fail(ErrorCode::Parse, e.what());
    }
}

Dataset load_csv_dataset(const std::string& path, const IngestConfig& config) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, "cannot open data file '" + path + "'");
    return read_csv_dataset(in, config);
}

void write_csv_dataset(std::ostream& out, const Dataset& data) {
    const DatasetCodecs& k = data.codecs();
    const bool weighted = std::any_of(data.weights().begin(), data.weights().end(),
                                      [](double w) { return w != 1.0; });
    std::vector<std::string> header;
    for (const auto& c : k.covariates.components()) header.push_back(c.name());
    header.push_back(k.exposure.name());
    for (const auto& r : k.confounders.components()) header.push_back(r.name());
    header.push_back(k.mediator.name());
    header.push_back(k.outcome.codec().name());
    if (weighted) header.push_back("weight");
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Record& rec = data.records()[i];
        std::vector<std::string> row;
        const auto cp = k.covariates.decompose(rec.c);
        for (std::size_t j = 0; j < cp.size(); ++j) row.push_back(k.covariates.components()[j].label(cp[j]));
        row.push_back(k.exposure.label(rec.a));
        const auto rp = k.confounders.decompose(rec.r);
        for (std::size_t j = 0; j < rp.size(); ++j) row.push_back(k.confounders.components()[j].label(rp[j]));
        row.push_back(k.mediator.label(rec.m));
        row.push_back(format_value(k.outcome.values()[rec.y]));
        if (weighted) row.push_back(format_value(data.weights()[i]));
        for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << row[j];
        out << '\n';
    }
}

IngestConfig ingest_config_for(const DatasetCodecs& codecs) {
    IngestConfig cfg;
    for (const auto& c : codecs.covariates.components()) {
        cfg.roles.covariates.push_back(c.name());
        cfg.levels[c.name()] = c.levels();
    }
    cfg.roles.exposure = codecs.exposure.name();
    for (const auto& r : codecs.confounders.components()) {
        cfg.roles.confounders.push_back(r.name());
        cfg.levels[r.name()] = r.levels();
    }
    cfg.roles.mediator = codecs.mediator.name();
    cfg.levels[codecs.mediator.name()] = codecs.mediator.levels();
    cfg.roles.outcome = codecs.outcome.codec().name();
    cfg.baseline_label = codecs.exposure.label(kBaseline);
    cfg.comparison_label = codecs.exposure.label(kComparison);
    cfg.y_values = codecs.outcome.values();
    return cfg;
}

}  // namespace medbounds
