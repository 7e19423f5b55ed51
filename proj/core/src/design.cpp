#include "monoglm/design.hpp"

#include "monoglm/error.hpp"

#include <Eigen/LU>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace monoglm {

std::string_view to_string(FamilyKind kind) {
    switch (kind) {
    case FamilyKind::gaussian: return "gaussian";
    case FamilyKind::logistic: return "logistic";
    case FamilyKind::cox: return "cox";
    }
    return "unknown";
}

FamilyKind parse_family(std::string_view name) {
    if (name == "gaussian") return FamilyKind::gaussian;
    if (name == "logistic") return FamilyKind::logistic;
    if (name == "cox") return FamilyKind::cox;
    throw InputError("unknown family '" + std::string(name) + "' (expected gaussian, logistic or cox)");
}

std::string_view to_string(Direction direction) {
    return direction == Direction::nondecreasing ? "nondecreasing" : "nonincreasing";
}

Direction parse_direction(std::string_view name) {
    if (name == "nondecreasing" || name == "increasing") return Direction::nondecreasing;
    if (name == "nonincreasing" || name == "decreasing") return Direction::nonincreasing;
    throw InputError("unknown direction '" + std::string(name) + "' (expected nondecreasing or nonincreasing)");
}

void OrderedFactor::validate() const {
    if (levels.size() < 2)
        throw InputError("factor '" + name + "' must declare at least two levels");
    std::set<std::string_view> seen;
    for (const auto& level : levels) {
        if (!seen.insert(level).second)
            throw InputError("factor '" + name + "' declares level '" + level + "' twice");
    }
}

std::optional<std::size_t> OrderedFactor::rank_of(std::string_view label) const {
    const auto it = std::find(levels.begin(), levels.end(), label);
    if (it == levels.end()) return std::nullopt;
    return static_cast<std::size_t>(it - levels.begin());
}

std::string ColumnLabel::display() const {
    switch (kind) {
    case ColumnKind::intercept: return "(intercept)";
    case ColumnKind::increment: return level.empty() ? name : name + ">=" + level;
    case ColumnKind::covariate: return name;
    }
    return name;
}

Eigen::MatrixXd encode_ordinal(const OrderedFactor& factor, std::span<const std::string> observations) {
    factor.validate();
    const auto n = static_cast<Eigen::Index>(observations.size());
    const auto steps = static_cast<Eigen::Index>(factor.levels.size()) - 1;
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(n, steps);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& label = observations[static_cast<std::size_t>(i)];
        const auto rank = factor.rank_of(label);
        if (!rank)
            throw InputError("factor '" + factor.name + "': unknown level '" + label + "'");
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(*rank); ++j) block(i, j) = 1.0;
    }
    return block;
}

void check_full_rank(const Eigen::MatrixXd& matrix, const std::vector<ColumnLabel>& labels) {
    const auto p = matrix.cols();
    if (p == 0) return;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(matrix);
    qr.setThreshold(1e-10);
    if (qr.rank() == p) return;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(matrix);
    lu.setThreshold(1e-10);
    const Eigen::MatrixXd kernel = lu.kernel();
    std::ostringstream msg;
    msg << "design matrix is rank deficient (rank " << qr.rank() << " < " << p << " columns)";
    if (kernel.cols() > 0 && kernel.col(0).lpNorm<Eigen::Infinity>() > 0.0) {
        const Eigen::VectorXd v = kernel.col(0);
        const double scale = v.lpNorm<Eigen::Infinity>();
        msg << "; linearly dependent columns:";
        const char* sep = " ";
        for (Eigen::Index j = 0; j < p; ++j) {
            if (std::abs(v[j]) > 1e-8 * scale) {
                msg << sep << (static_cast<std::size_t>(j) < labels.size() ? labels[j].display()
                                                                           : "column " + std::to_string(j));
                sep = ", ";
            }
        }
    }
    throw InputError(msg.str());
}

DesignSystem DesignSystem::from_matrix(Eigen::MatrixXd matrix, std::vector<Eigen::Index> constrained) {
    DesignSystem d;
    std::sort(constrained.begin(), constrained.end());
    constrained.erase(std::unique(constrained.begin(), constrained.end()), constrained.end());
    for (auto j : constrained) {
        if (j < 0 || j >= matrix.cols())
            throw std::invalid_argument("constrained index out of range");
    }
    d.labels_.resize(static_cast<std::size_t>(matrix.cols()));
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
        auto& label = d.labels_[static_cast<std::size_t>(j)];
        label.name = "x" + std::to_string(j);
        label.kind = std::binary_search(constrained.begin(), constrained.end(), j) ? ColumnKind::increment
                                                                                   : ColumnKind::covariate;
    }
    d.matrix_ = std::move(matrix);
    d.constrained_ = std::move(constrained);
    check_full_rank(d.matrix_, d.labels_);
    return d;
}

bool DesignSystem::is_constrained(Eigen::Index column) const {
    return std::binary_search(constrained_.begin(), constrained_.end(), column);
}

std::optional<Eigen::Index> DesignSystem::intercept_column() const {
    for (std::size_t j = 0; j < labels_.size(); ++j)
        if (labels_[j].kind == ColumnKind::intercept) return static_cast<Eigen::Index>(j);
    return std::nullopt;
}

std::optional<std::size_t> DesignSystem::factor_index(std::string_view name) const {
    for (std::size_t f = 0; f < factors_.size(); ++f)
        if (factors_[f].name == name) return f;
    return std::nullopt;
}

std::vector<Eigen::Index> DesignSystem::factor_columns(std::size_t factor) const {
    std::vector<Eigen::Index> out;
    for (const auto& col : factors_.at(factor).step_column)
        if (col) out.push_back(*col);
    return out;
}

std::vector<double> DesignSystem::increments(const Eigen::VectorXd& beta, std::size_t factor) const {
    const auto& block = factors_.at(factor);
    const double sign = block.direction == Direction::nonincreasing ? -1.0 : 1.0;
    std::vector<double> out;
    for (std::size_t r = block.baseline + 1; r < block.levels.size(); ++r) {
        if (block.status[r] == LevelStatus::dropped) break;
        out.push_back(block.step_column[r] ? sign * beta[*block.step_column[r]] : 0.0);
    }
    return out;
}

std::vector<double> DesignSystem::level_effects(const Eigen::VectorXd& beta, std::size_t factor) const {
    const auto& block = factors_.at(factor);
    const double sign = block.direction == Direction::nonincreasing ? -1.0 : 1.0;
    std::vector<double> out(block.levels.size(), std::numeric_limits<double>::quiet_NaN());
    double effect = 0.0;
    for (std::size_t r = block.baseline; r < block.levels.size(); ++r) {
        if (block.status[r] == LevelStatus::dropped) continue;
        if (block.step_column[r]) effect += sign * beta[*block.step_column[r]];
        out[r] = effect;
    }
    return out;
}

DesignSystem DesignSystem::without_columns(std::span<const Eigen::Index> columns) const {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < cols(); ++j) {
        if (std::find(columns.begin(), columns.end(), j) == columns.end()) keep.push_back(j);
    }
    DesignSystem d;
    d.matrix_.resize(rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
        d.matrix_.col(static_cast<Eigen::Index>(k)) = matrix_.col(keep[k]);
        d.labels_.push_back(labels_[static_cast<std::size_t>(keep[k])]);
        if (is_constrained(keep[k])) d.constrained_.push_back(static_cast<Eigen::Index>(k));
    }
    d.warnings_ = warnings_;
    return d;
}

DesignSystem assemble(const ModelSpec& spec, const ObservationTable& data) {
    const bool intercept = spec.has_intercept();
    if (spec.family.kind == FamilyKind::cox && intercept)
        throw InputError("the Cox model has no intercept; remove 'intercept: true' from the configuration");
    if ((spec.family.kind == FamilyKind::cox) != spec.family.tie_rule.has_value())
        throw InputError("a tie rule is required for Cox models and only for Cox models");
    const auto n = static_cast<Eigen::Index>(data.rows());
    if (n == 0) throw InputError("data contains no rows");

    DesignSystem d;
    std::vector<Eigen::VectorXd> columns;

    if (intercept) {
        columns.push_back(Eigen::VectorXd::Ones(n));
        d.labels_.push_back({ColumnKind::intercept, "(intercept)", {}, 0, 1});
    }

    for (std::size_t f = 0; f < spec.factors.size(); ++f) {
        const auto& factor = spec.factors[f];
        factor.validate();
        const auto& observed = data.labels(factor.name);
        Eigen::MatrixXd block;
        try {
            block = encode_ordinal(factor, observed);
        } catch (const InputError&) {
            for (std::size_t r = 0; r < observed.size(); ++r) {
                if (!factor.rank_of(observed[r]))
                    throw InputError("factor '" + factor.name + "' line " + std::to_string(data.line_of(r)) +
                                     ": unknown level '" + observed[r] + "'");
            }
            throw;
        }

        const std::size_t k = factor.levels.size();
        std::vector<std::size_t> counts(k, 0);
        for (const auto& label : observed) ++counts[*factor.rank_of(label)];
        std::size_t first = k, last = 0, distinct = 0;
        for (std::size_t r = 0; r < k; ++r) {
            if (counts[r] == 0) continue;
            first = std::min(first, r);
            last = r;
            ++distinct;
        }
        if (distinct < 2) {
            throw InputError("factor '" + factor.name + "' has fewer than two observed levels");
        }

        FactorBlock layout;
        layout.name = factor.name;
        layout.direction = factor.direction;
        layout.levels = factor.levels;
        layout.status.assign(k, LevelStatus::observed);
        layout.step_column.assign(k, std::nullopt);
        layout.baseline = first;
        const double sign = factor.direction == Direction::nonincreasing ? -1.0 : 1.0;

        for (std::size_t r = 0; r < k; ++r) {
            if (r < first || r > last) {
                layout.status[r] = LevelStatus::dropped;
                d.warnings_.push_back("factor '" + factor.name + "': level '" + factor.levels[r] +
                                      "' is not observed and lies at the boundary of the ordering; dropped");
            } else if (counts[r] == 0) {
                layout.status[r] = LevelStatus::unobserved_interior;
                d.warnings_.push_back("factor '" + factor.name + "': level '" + factor.levels[r] +
                                      "' is not observed; its effect is tied to the preceding level");
            } else if (r > first) {
                layout.step_column[r] = static_cast<Eigen::Index>(columns.size());
                d.constrained_.push_back(static_cast<Eigen::Index>(columns.size()));
                columns.push_back(sign * block.col(static_cast<Eigen::Index>(r) - 1));
                d.labels_.push_back({ColumnKind::increment, factor.name, factor.levels[r], f,
                                     static_cast<int>(sign)});
            }
        }
        d.factors_.push_back(std::move(layout));
    }

    for (const auto& name : spec.covariates) {
        columns.push_back(data.numeric(name));
        d.labels_.push_back({ColumnKind::covariate, name, {}, 0, 1});
    }

    d.matrix_.resize(n, static_cast<Eigen::Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) d.matrix_.col(static_cast<Eigen::Index>(j)) = columns[j];
    check_full_rank(d.matrix_, d.labels_);
    return d;
}

Response extract_response(const ModelSpec& spec, const ObservationTable& data) {
    switch (spec.family.kind) {
    case FamilyKind::gaussian:
    case FamilyKind::logistic: {
        if (spec.response.empty()) throw InputError("no response column configured");
        Eigen::VectorXd y = data.numeric(spec.response);
        if (spec.family.kind == FamilyKind::logistic) {
            for (Eigen::Index i = 0; i < y.size(); ++i) {
                if (y[i] != 0.0 && y[i] != 1.0)
                    throw InputError("column '" + spec.response + "' line " +
                                     std::to_string(data.line_of(static_cast<std::size_t>(i))) +
                                     ": logistic response must be 0 or 1");
            }
        }
        return Response::outcome(std::move(y));
    }
    case FamilyKind::cox: {
        if (spec.time.empty()) throw InputError("no time column configured for the Cox model");
        if (spec.event.empty()) throw InputError("no event column configured for the Cox model");
        Eigen::VectorXd time = data.numeric(spec.time);
        Eigen::VectorXd event = data.numeric(spec.event);
        for (Eigen::Index i = 0; i < time.size(); ++i) {
            const auto line = std::to_string(data.line_of(static_cast<std::size_t>(i)));
            if (!(time[i] > 0.0) || !std::isfinite(time[i]))
                throw InputError("column '" + spec.time + "' line " + line + ": times must be positive");
            if (event[i] != 0.0 && event[i] != 1.0)
                throw InputError("column '" + spec.event + "' line " + line + ": event indicator must be 0 or 1");
        }
        if (event.sum() == 0.0) throw InputError("column '" + spec.event + "' contains no events");
        return Response::survival(std::move(time), std::move(event));
    }
    }
    throw InputError("unknown family");
}

} // namespace monoglm
