#include "tdfdr/dataset.hpp"

#include <cmath>
#include <string>
#include <unordered_set>

#include "tdfdr/error.hpp"

namespace tdfdr {

GroupedDataset::GroupedDataset(std::vector<std::string> ids, std::size_t n_columns, std::vector<double> values,
                               std::vector<std::size_t> case_columns, std::vector<std::size_t> control_columns,
                               std::vector<std::string> column_names)
    : ids_{std::move(ids)},
      n_columns_{n_columns},
      values_{std::move(values)},
      case_columns_{std::move(case_columns)},
      control_columns_{std::move(control_columns)},
      column_names_{std::move(column_names)} {
    if (values_.size() != ids_.size() * n_columns_) {
        throw DataError("dataset: " + std::to_string(values_.size()) + " values for " + std::to_string(ids_.size()) +
                        " tests x " + std::to_string(n_columns_) + " columns");
    }
    if (!column_names_.empty() && column_names_.size() != n_columns_) {
        throw DataError("dataset: column name count does not match column count");
    }
    if (case_columns_.empty() || control_columns_.empty()) {
        throw DataError("dataset: case and control column sets must be nonempty");
    }
    if (case_columns_.size() < 2 || control_columns_.size() < 2) {
        throw DataError("dataset: each group needs at least two samples");
    }
    std::unordered_set<std::size_t> seen;
    for (const auto* cols : {&case_columns_, &control_columns_}) {
        for (const auto c : *cols) {
            if (c >= n_columns_) throw DataError("dataset: column index " + std::to_string(c) + " out of range");
            if (!seen.insert(c).second) {
                throw DataError("dataset: column " + std::to_string(c + 1) + " selected more than once");
            }
        }
    }
    for (std::size_t j = 0; j < ids_.size(); ++j) {
        for (const auto* cols : {&case_columns_, &control_columns_}) {
            for (const auto c : *cols) {
                if (!std::isfinite(values_[j * n_columns_ + c])) {
                    throw DataError("dataset: non-finite value in test '" + ids_[j] + "'");
                }
            }
        }
    }
}

GroupedDataset GroupedDataset::contiguous(std::vector<std::string> ids, std::size_t n_cases, std::size_t n_controls,
                                          std::vector<double> values) {
    std::vector<std::size_t> cases(n_cases);
    std::vector<std::size_t> controls(n_controls);
    for (std::size_t i = 0; i < n_cases; ++i) cases[i] = i;
    for (std::size_t i = 0; i < n_controls; ++i) controls[i] = n_cases + i;
    return GroupedDataset(std::move(ids), n_cases + n_controls, std::move(values), std::move(cases),
                          std::move(controls));
}

std::span<const double> GroupedDataset::row(std::size_t test) const {
    if (test >= ids_.size()) throw InvalidArgument("dataset: test index out of range");
    return std::span<const double>(values_).subspan(test * n_columns_, n_columns_);
}

GroupedSamples GroupedDataset::samples(std::size_t test, std::vector<double>& buffer) const {
    const auto r = row(test);
    buffer.clear();
    for (const auto c : case_columns_) buffer.push_back(r[c]);
    for (const auto c : control_columns_) buffer.push_back(r[c]);
    return GroupedSamples{buffer, case_columns_.size()};
}

}  // namespace tdfdr
