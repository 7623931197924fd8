#pragma once
#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <ocmt/basis.hpp>
#include <ocmt/error.hpp>

namespace ocmt {

/// Maps a raw column value into the model's covariate space.
struct ColumnTransform
{
    bool log1p = false;
    std::optional<AffineUnitMap> unit_map;

    double apply(double raw) const
    {
        double v = log1p ? std::log1p(raw) : raw;
        return unit_map ? unit_map->apply(v) : v;
    }
};

/// Response plus covariate matrix (n x p). Continuous columns live in
/// [0,1]; binary columns in {0,1}.
struct Dataset
{
    Eigen::VectorXd y;
    Eigen::MatrixXd x;
    std::vector<VariableKind> kinds;
    std::vector<ColumnTransform> transforms;
    std::vector<std::string> names;

    int n() const noexcept { return static_cast<int>(y.size()); }
    int p() const noexcept { return static_cast<int>(x.cols()); }

    std::string name(int j) const
    {
        if (j >= 0 && j < static_cast<int>(names.size())) return names[j];
        return "X" + std::to_string(j + 1);
    }

    void validate() const
    {
        if (x.rows() != y.size()) {
            throw DimensionError("covariate matrix has " + std::to_string(x.rows()) + " rows, response has "
                                 + std::to_string(y.size()));
        }
        if (static_cast<int>(kinds.size()) != p()) throw DimensionError("one variable kind per column required");
        if (!transforms.empty() && static_cast<int>(transforms.size()) != p()) {
            throw DimensionError("transform count does not match column count");
        }
        if (!names.empty() && static_cast<int>(names.size()) != p()) {
            throw DimensionError("name count does not match column count");
        }
        if (!y.allFinite()) throw DomainError("response contains non-finite values");
        for (int j = 0; j < p(); ++j) {
            for (Eigen::Index i = 0; i < x.rows(); ++i) {
                const double v = x(i, j);
                const bool ok = kinds[j] == VariableKind::binary_linear ? (v == 0.0 || v == 1.0)
                                                                        : (v >= 0.0 && v <= 1.0);
                if (!ok) {
                    throw DomainError("column " + name(j) + " row " + std::to_string(i) + ": value "
                                      + std::to_string(v) + " invalid for a " + to_string(kinds[j]) + " column");
                }
            }
        }
    }
};

} // namespace ocmt
