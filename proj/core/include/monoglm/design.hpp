#pragma once

#include "monoglm/families.hpp"
#include "monoglm/model_spec.hpp"
#include "monoglm/observation_table.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace monoglm {

enum class ColumnKind { intercept, increment, covariate };

/// Where a design column came from.
struct ColumnLabel {
    ColumnKind kind = ColumnKind::covariate;
    std::string name;            // factor or covariate name, "(intercept)" for the intercept
    std::string level;           // increment columns: the level this increment steps into
    std::size_t factor = 0;      // increment columns: index into DesignSystem::factors()
    int sign = 1;                // -1 for nonincreasing factors

    std::string display() const;
};

enum class LevelStatus { observed, unobserved_interior, dropped };

/// Layout of one ordered factor inside the design matrix.
struct FactorBlock {
    std::string name;
    Direction direction = Direction::nondecreasing;
    std::vector<std::string> levels;                       // declared order
    std::vector<LevelStatus> status;                       // per declared level
    std::vector<std::optional<Eigen::Index>> step_column;  // column carrying the step into level r
    std::size_t baseline = 0;                              // first retained level
};

/**
 * Design matrix with the set J of coordinates constrained to be nonnegative.
 *
 * Ordered factors use cumulative coding: the column for level r is 1 when an observation's
 * level rank is at least r. With a sign of -1 folded into the columns of nonincreasing
 * factors, every monotone level-effect sequence corresponds to beta_j >= 0 on J.
 */
class DesignSystem {
  public:
    DesignSystem() = default;

    /// Wraps an arbitrary full-rank matrix. Constrained columns get increment labels.
    static DesignSystem from_matrix(Eigen::MatrixXd matrix, std::vector<Eigen::Index> constrained);

    const Eigen::MatrixXd& matrix() const { return matrix_; }
    Eigen::Index rows() const { return matrix_.rows(); }
    Eigen::Index cols() const { return matrix_.cols(); }
    const std::vector<Eigen::Index>& constrained() const { return constrained_; }
    const std::vector<ColumnLabel>& labels() const { return labels_; }
    const std::vector<FactorBlock>& factors() const { return factors_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    bool is_constrained(Eigen::Index column) const;
    std::optional<Eigen::Index> intercept_column() const;
    std::optional<std::size_t> factor_index(std::string_view name) const;
    /// Increment columns belonging to a factor, in level order.
    std::vector<Eigen::Index> factor_columns(std::size_t factor) const;

    Eigen::VectorXd linear_predictor(const Eigen::VectorXd& beta) const { return matrix_ * beta; }

    /// Reported increments of a factor (sign applied), one per retained step.
    std::vector<double> increments(const Eigen::VectorXd& beta, std::size_t factor) const;

    /// Per declared level: effect relative to the baseline level, NaN for dropped levels.
    std::vector<double> level_effects(const Eigen::VectorXd& beta, std::size_t factor) const;

    /// Removes columns (e.g. for a nested null model); factor layout is not carried over.
    DesignSystem without_columns(std::span<const Eigen::Index> columns) const;

  private:
    friend DesignSystem assemble(const ModelSpec&, const ObservationTable&);

    Eigen::MatrixXd matrix_;
    std::vector<Eigen::Index> constrained_;
    std::vector<ColumnLabel> labels_;
    std::vector<FactorBlock> factors_;
    std::vector<std::string> warnings_;
};

/// Cumulative 0/1 coding of one factor: n x (k-1), column j is 1 iff the level rank is > j.
Eigen::MatrixXd encode_ordinal(const OrderedFactor& factor, std::span<const std::string> observations);

/// Builds [intercept?][factor blocks][covariates] and checks full column rank.
DesignSystem assemble(const ModelSpec& spec, const ObservationTable& data);

/// Extracts and validates the response columns named in the spec.
Response extract_response(const ModelSpec& spec, const ObservationTable& data);

/// Throws InputError naming a set of linearly dependent columns if rank < cols.
void check_full_rank(const Eigen::MatrixXd& matrix, const std::vector<ColumnLabel>& labels);

} // namespace monoglm
