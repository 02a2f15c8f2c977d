#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tdfdr/scores.hpp"

namespace tdfdr {

/// m tests x n_columns observations (row-major) with disjoint case and
/// control column sets. Columns outside both sets are carried but unused.
class GroupedDataset {
public:
    GroupedDataset() = default;
    /// Throws DataError when a dataset invariant is violated.
    GroupedDataset(std::vector<std::string> ids, std::size_t n_columns, std::vector<double> values,
                   std::vector<std::size_t> case_columns, std::vector<std::size_t> control_columns,
                   std::vector<std::string> column_names = {});

    /// Dataset whose columns are cases [0, n_cases) then controls.
    static GroupedDataset contiguous(std::vector<std::string> ids, std::size_t n_cases, std::size_t n_controls,
                                     std::vector<double> values);

    std::size_t m() const noexcept { return ids_.size(); }
    std::size_t n() const noexcept { return case_columns_.size() + control_columns_.size(); }
    std::size_t n_cases() const noexcept { return case_columns_.size(); }
    std::size_t n_controls() const noexcept { return control_columns_.size(); }
    std::size_t n_columns() const noexcept { return n_columns_; }

    const std::vector<std::string>& ids() const noexcept { return ids_; }
    const std::vector<std::size_t>& case_columns() const noexcept { return case_columns_; }
    const std::vector<std::size_t>& control_columns() const noexcept { return control_columns_; }
    const std::vector<std::string>& column_names() const noexcept { return column_names_; }
    const std::vector<double>& values() const noexcept { return values_; }

    std::span<const double> row(std::size_t test) const;

    /// Copies test j's samples into `buffer` (cases first) and returns a view.
    GroupedSamples samples(std::size_t test, std::vector<double>& buffer) const;

private:
    std::vector<std::string> ids_;
    std::size_t n_columns_ = 0;
    std::vector<double> values_;
    std::vector<std::size_t> case_columns_;
    std::vector<std::size_t> control_columns_;
    std::vector<std::string> column_names_;
};

}  // namespace tdfdr
