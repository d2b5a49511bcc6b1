#pragma once

#include <random>
#include <span>
#include <string>
#include <vector>

#include "pfo/point.hpp"

namespace pfo {

enum class SetKind { ColumnL1Ball, Simplex, L2Ball };

const char* to_string(SetKind kind);

/// One factor of a feasible set. `offset` is the first flat (column-major) index the
/// block occupies; the block is viewed as a rows x cols column-major matrix.
struct SetBlock {
  SetKind kind = SetKind::ColumnL1Ball;
  double radius = 1.0;  // radius for the balls, scale for the simplex
  Index offset = 0;
  Index rows = 1;
  Index cols = 1;

  Index size() const { return rows * cols; }
  double diameter() const;
};

/// Compact convex set given as a Cartesian product of simple blocks, each with a
/// closed-form linear minimization oracle. A plain set is a single block covering the
/// whole point.
class FeasibleSet {
 public:
  static FeasibleSet column_l1_ball(double radius, Index rows, Index cols);
  static FeasibleSet simplex(double scale, Index rows, Index cols);
  static FeasibleSet l2_ball(double radius, Index rows, Index cols);
  /// Blocks are laid out consecutively (offsets are reassigned) in a (total x 1) point.
  static FeasibleSet product(std::vector<SetBlock> blocks);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  /// Euclidean diameter; exact for every supported block kind.
  double diameter() const { return diameter_; }
  std::span<const SetBlock> blocks() const { return blocks_; }
  bool is_product() const { return blocks_.size() > 1; }
  std::string describe() const;

 private:
  FeasibleSet(Index rows, Index cols, std::vector<SetBlock> blocks);

  Index rows_;
  Index cols_;
  std::vector<SetBlock> blocks_;
  double diameter_;
};

inline constexpr double kDefaultContainsTol = 1e-9;

/// Vertex minimizing <direction, v>. Ties go to the lowest index; exactly-zero
/// columns of an l1 block pick +radius on the first row.
Point lmo(const FeasibleSet& set, const Point& direction);

bool contains(const FeasibleSet& set, const Point& p, double tol = kDefaultContainsTol);

/// Exhaustive vertex list for small single-block polytopes (rows * cols <= 12).
std::vector<Point> vertex_enumerate(const FeasibleSet& set);

/// Origin when feasible, otherwise the tie-break vertex.
Point initial_point(const FeasibleSet& set);

/// Random feasible point; roughly one draw in eight lands on the boundary.
Point random_feasible_point(const FeasibleSet& set, std::mt19937_64& rng);

}  // namespace pfo
