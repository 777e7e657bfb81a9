#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qkevo/rng.hpp"

namespace qkevo {

/// Feature matrix + integer labels; labels are a contiguous set {0..C-1}
/// after ingestion.
struct Dataset {
    Eigen::MatrixXd X;
    std::vector<int> y;
    std::string name;
    std::string split;  // "", "train", "validation" or "test"

    Eigen::Index n() const { return X.rows(); }
    Eigen::Index m() const { return X.cols(); }
    int class_count() const {
        std::set<int> distinct(y.begin(), y.end());
        return static_cast<int>(distinct.size());
    }
};

struct DataSplits {
    Dataset train;
    Dataset validation;
    Dataset test;
};

/// Two interleaved half-circles with Gaussian displacement noise.
inline Dataset make_moons(int n_samples, double noise, std::uint64_t seed) {
    if (n_samples < 2 || n_samples % 2 != 0)
        throw std::invalid_argument("make_moons: n_samples must be even and >= 2");
    constexpr double pi = std::numbers::pi;
    const int half = n_samples / 2;
    Dataset d;
    d.name = "moons";
    d.X.resize(n_samples, 2);
    d.y.resize(static_cast<std::size_t>(n_samples));
    Rng rng(mix_seed(seed, 0x6d6f6f6eULL));
    for (int i = 0; i < half; ++i) {
        const double t = pi * i / (half - 1);
        d.X(i, 0) = std::cos(t);
        d.X(i, 1) = std::sin(t);
        d.y[static_cast<std::size_t>(i)] = 0;
        d.X(half + i, 0) = 1.0 - std::cos(t);
        d.X(half + i, 1) = 0.5 - std::sin(t);
        d.y[static_cast<std::size_t>(half + i)] = 1;
    }
    for (int i = 0; i < n_samples; ++i) {
        d.X(i, 0) += noise * rng.next_normal();
        d.X(i, 1) += noise * rng.next_normal();
    }
    return d;
}

/// Two concentric circles; class 0 is the inner ring (radius factor < 1).
inline Dataset make_circles(int n_samples, double noise, std::uint64_t seed,
                            double factor = 0.5) {
    if (n_samples < 2 || n_samples % 2 != 0)
        throw std::invalid_argument("make_circles: n_samples must be even and >= 2");
    if (!(factor > 0.0 && factor < 1.0))
        throw std::invalid_argument("make_circles: factor must be in (0, 1)");
    constexpr double pi = std::numbers::pi;
    const int half = n_samples / 2;
    Dataset d;
    d.name = "circles";
    d.X.resize(n_samples, 2);
    d.y.resize(static_cast<std::size_t>(n_samples));
    Rng rng(mix_seed(seed, 0x63697263ULL));
    for (int i = 0; i < half; ++i) {
        const double t = 2.0 * pi * i / half;
        d.X(i, 0) = factor * std::cos(t);
        d.X(i, 1) = factor * std::sin(t);
        d.y[static_cast<std::size_t>(i)] = 0;
        d.X(half + i, 0) = std::cos(t);
        d.X(half + i, 1) = std::sin(t);
        d.y[static_cast<std::size_t>(half + i)] = 1;
    }
    for (int i = 0; i < n_samples; ++i) {
        d.X(i, 0) += noise * rng.next_normal();
        d.X(i, 1) += noise * rng.next_normal();
    }
    return d;
}

/// Four Gaussian blobs at (+-1, +-1), labeled by the sign product of the
/// blob center (positive product -> class 1).
inline Dataset make_xor(int n_samples, double noise, std::uint64_t seed) {
    if (n_samples < 4 || n_samples % 2 != 0)
        throw std::invalid_argument("make_xor: n_samples must be even and >= 4");
    static const double centers[4][2] = {{1, 1}, {-1, -1}, {1, -1}, {-1, 1}};
    Dataset d;
    d.name = "xor";
    d.X.resize(n_samples, 2);
    d.y.resize(static_cast<std::size_t>(n_samples));
    Rng rng(mix_seed(seed, 0x786f72ULL));
    // per class: n/2 points split as evenly as possible between its 2 blobs
    int row = 0;
    for (int blob = 0; blob < 4; ++blob) {
        const int in_class = n_samples / 2;
        const int count = blob % 2 == 0 ? (in_class + 1) / 2 : in_class / 2;
        for (int i = 0; i < count; ++i, ++row) {
            d.X(row, 0) = centers[blob][0] + noise * rng.next_normal();
            d.X(row, 1) = centers[blob][1] + noise * rng.next_normal();
            d.y[static_cast<std::size_t>(row)] = centers[blob][0] * centers[blob][1] > 0 ? 1 : 0;
        }
    }
    return d;
}

namespace detail {

/// Minimal RFC-4180-style reader: quoted fields, embedded commas and quotes.
inline std::vector<std::string> parse_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (ch != '\r') {
            field += ch;
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

inline bool is_missing(const std::string& s) {
    return s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == "?";
}

inline bool parse_number(const std::string& s, double& out) {
    std::size_t used = 0;
    try {
        out = std::stod(s, &used);
    } catch (...) {
        return false;
    }
    while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
    return used == s.size();
}

}  // namespace detail

/// Load a CSV with a header row. The label column is selected by name;
/// feature columns whose first data value is numeric are parsed as numbers
/// (later non-numeric entries are an error), all other columns are
/// integer-encoded by first appearance. Rows with missing values are
/// rejected and counted. Integer label values map to {0..C-1} in ascending
/// order; non-numeric labels map by first appearance.
inline Dataset load_csv(const std::string& path, const std::string& label_column,
                        int* rejected_rows = nullptr) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_csv: empty file " + path);
    const std::vector<std::string> header = detail::parse_csv_line(line);
    int label_idx = -1;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] == label_column) label_idx = static_cast<int>(j);
    if (label_idx < 0)
        throw std::runtime_error("load_csv: label column '" + label_column + "' not in " + path);

    std::vector<std::vector<std::string>> rows;
    int rejected = 0;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields = detail::parse_csv_line(line);
        if (fields.size() != header.size())
            throw std::runtime_error("load_csv: row " + std::to_string(line_no) +
                                     " has wrong field count");
        const bool missing =
            std::any_of(fields.begin(), fields.end(),
                        [](const std::string& f) { return detail::is_missing(f); });
        if (missing) {
            ++rejected;
            continue;
        }
        rows.push_back(std::move(fields));
    }
    if (rejected > 0)
        std::cerr << "warning: " << path << ": rejected " << rejected
                  << " row(s) with missing values\n";
    if (rejected_rows != nullptr) *rejected_rows = rejected;
    if (rows.empty()) throw std::runtime_error("load_csv: no usable rows in " + path);

    const std::size_t n_cols = header.size();
    std::vector<bool> numeric(n_cols, true);
    for (std::size_t j = 0; j < n_cols; ++j) {
        double v;
        numeric[j] = detail::parse_number(rows[0][j], v);
    }

    Dataset d;
    d.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n_cols - 1));
    d.y.resize(rows.size());

    std::vector<std::map<std::string, int>> codes(n_cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        Eigen::Index col = 0;
        for (std::size_t j = 0; j < n_cols; ++j) {
            if (static_cast<int>(j) == label_idx) continue;
            double v;
            if (numeric[j]) {
                if (!detail::parse_number(rows[i][j], v))
                    throw std::runtime_error("load_csv: non-numeric value '" + rows[i][j] +
                                             "' in numeric column '" + header[j] + "', row " +
                                             std::to_string(i + 2));
            } else {
                auto [it, inserted] =
                    codes[j].try_emplace(rows[i][j], static_cast<int>(codes[j].size()));
                (void)inserted;
                v = it->second;
            }
            d.X(static_cast<Eigen::Index>(i), col++) = v;
        }
    }

    // label mapping
    const auto lj = static_cast<std::size_t>(label_idx);
    bool labels_integer = true;
    for (const auto& r : rows) {
        double v;
        if (!detail::parse_number(r[lj], v) || v != std::floor(v)) {
            labels_integer = false;
            break;
        }
    }
    std::map<std::string, int> label_code;
    if (labels_integer) {
        std::map<long long, std::string> ordered;
        for (const auto& r : rows) ordered[std::llround(std::stod(r[lj]))] = r[lj];
        for (const auto& [value, text] : ordered)
            label_code.emplace(text, static_cast<int>(label_code.size()));
        // values like "1" and "1.0" denote the same class
        for (const auto& r : rows)
            if (!label_code.count(r[lj]))
                label_code.emplace(r[lj],
                                   label_code.at(ordered.at(std::llround(std::stod(r[lj])))));
    } else {
        for (const auto& r : rows)
            label_code.try_emplace(r[lj], static_cast<int>(label_code.size()));
    }
    for (std::size_t i = 0; i < rows.size(); ++i) d.y[i] = label_code.at(rows[i][lj]);
    return d;
}

namespace detail {

/// Pick `want` indices from `pools` (one pool per class, pre-shuffled),
/// proportionally by pool size with largest-remainder rounding; selected
/// indices are removed from the pools.
inline std::vector<int> take_stratified(std::vector<std::vector<int>>& pools, int want) {
    std::size_t remaining = 0;
    for (const auto& p : pools) remaining += p.size();
    std::vector<int> quota(pools.size(), 0);
    std::vector<std::pair<double, std::size_t>> fractions;  // (-frac, class) for stable sort
    int assigned = 0;
    for (std::size_t c = 0; c < pools.size(); ++c) {
        const double exact =
            static_cast<double>(want) * static_cast<double>(pools[c].size()) /
            static_cast<double>(remaining);
        quota[c] = static_cast<int>(std::floor(exact));
        assigned += quota[c];
        fractions.emplace_back(-(exact - quota[c]), c);
    }
    std::sort(fractions.begin(), fractions.end());
    for (int extra = 0; extra < want - assigned; ++extra) ++quota[fractions[extra].second];

    std::vector<int> picked;
    picked.reserve(static_cast<std::size_t>(want));
    for (std::size_t c = 0; c < pools.size(); ++c) {
        for (int k = 0; k < quota[c]; ++k) {
            picked.push_back(pools[c].back());
            pools[c].pop_back();
        }
    }
    return picked;
}

inline Dataset subset(const Dataset& d, std::vector<int> idx, const std::string& tag) {
    std::sort(idx.begin(), idx.end());
    Dataset out;
    out.name = d.name;
    out.split = tag;
    out.X.resize(static_cast<Eigen::Index>(idx.size()), d.X.cols());
    out.y.resize(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        out.X.row(static_cast<Eigen::Index>(i)) = d.X.row(idx[i]);
        out.y[i] = d.y[static_cast<std::size_t>(idx[i])];
    }
    return out;
}

}  // namespace detail

/// Split into train/validation/test. Sizes follow the two-stage rule
/// test = ceil(f_test * n), then validation = ceil of its share of the
/// remainder; stratified by label when requested (classes with fewer than 3
/// members fall back to an unstratified split with a warning).
inline DataSplits split(const Dataset& d, std::array<double, 3> fractions, std::uint64_t seed,
                        bool stratified = true) {
    const double sum = fractions[0] + fractions[1] + fractions[2];
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("split: fractions must sum to 1");
    const int n = static_cast<int>(d.n());
    if (n < 3) throw std::invalid_argument("split: need at least 3 rows");

    const int n_test = static_cast<int>(std::ceil(fractions[2] * n));
    const int n_rest = n - n_test;
    const double val_share = fractions[1] / (fractions[0] + fractions[1]);
    const int n_val = std::min(n_rest, static_cast<int>(std::ceil(val_share * n_rest)));

    if (stratified) {
        std::map<int, int> counts;
        for (int label : d.y) ++counts[label];
        for (const auto& [label, count] : counts)
            if (count < 3) {
                std::cerr << "warning: class " << label << " has " << count
                          << " member(s); falling back to unstratified split\n";
                stratified = false;
                break;
            }
    }

    Rng rng(mix_seed(seed, 0x73706c6974ULL));
    auto shuffle = [&rng](std::vector<int>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[static_cast<std::size_t>(rng.next_int(static_cast<int>(i)))]);
    };

    std::vector<std::vector<int>> pools;
    if (stratified) {
        std::map<int, std::vector<int>> by_class;
        for (int i = 0; i < n; ++i) by_class[d.y[static_cast<std::size_t>(i)]].push_back(i);
        for (auto& [label, members] : by_class) {
            shuffle(members);
            pools.push_back(std::move(members));
        }
    } else {
        std::vector<int> all(static_cast<std::size_t>(n));
        std::iota(all.begin(), all.end(), 0);
        shuffle(all);
        pools.push_back(std::move(all));
    }

    const std::vector<int> test_idx = detail::take_stratified(pools, n_test);
    const std::vector<int> val_idx = detail::take_stratified(pools, n_val);
    std::vector<int> train_idx;
    for (const auto& p : pools) train_idx.insert(train_idx.end(), p.begin(), p.end());

    return {detail::subset(d, train_idx, "train"), detail::subset(d, val_idx, "validation"),
            detail::subset(d, test_idx, "test")};
}

inline DataSplits split(const Dataset& d, std::uint64_t seed, bool stratified = true) {
    return split(d, {0.48, 0.32, 0.20}, seed, stratified);
}

}  // namespace qkevo
