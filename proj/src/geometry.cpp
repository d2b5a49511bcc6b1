#include "pfo/geometry.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace pfo {
namespace {

using Block = Eigen::Map<Eigen::MatrixXd>;
using ConstBlock = Eigen::Map<const Eigen::MatrixXd>;

ConstBlock view(const Point& p, const SetBlock& b) {
  return ConstBlock(p.data() + b.offset, b.rows, b.cols);
}

Block view(Point& p, const SetBlock& b) { return Block(p.data() + b.offset, b.rows, b.cols); }

void check_dims(const FeasibleSet& set, const Point& p, const char* what) {
  if (p.rows() != set.rows() || p.cols() != set.cols()) {
    fail(ErrorCode::DimensionMismatch, std::string(what) + ": point " +
                                           dims_string(p.rows(), p.cols()) + " vs set " +
                                           dims_string(set.rows(), set.cols()));
  }
}

void lmo_block(const SetBlock& b, const ConstBlock& d, Block out) {
  out.setZero();
  switch (b.kind) {
    case SetKind::ColumnL1Ball:
      for (Index j = 0; j < b.cols; ++j) {
        Index best = 0;
        double best_abs = std::abs(d(0, j));
        for (Index i = 1; i < b.rows; ++i) {
          const double a = std::abs(d(i, j));
          if (a > best_abs) {
            best_abs = a;
            best = i;
          }
        }
        out(best, j) = d(best, j) > 0.0 ? -b.radius : b.radius;
      }
      break;
    case SetKind::Simplex: {
      Index best = 0;
      const Index n = b.size();
      for (Index i = 1; i < n; ++i) {
        if (d.data()[i] < d.data()[best]) best = i;
      }
      out.data()[best] = b.radius;
      break;
    }
    case SetKind::L2Ball: {
      const double norm = d.norm();
      if (norm == 0.0) {
        out.data()[0] = b.radius;
      } else {
        out = d * (-b.radius / norm);
      }
      break;
    }
  }
}

bool contains_block(const SetBlock& b, const ConstBlock& x, double tol) {
  switch (b.kind) {
    case SetKind::ColumnL1Ball:
      for (Index j = 0; j < b.cols; ++j) {
        if (x.col(j).lpNorm<1>() > b.radius + tol) return false;
      }
      return true;
    case SetKind::Simplex:
      return x.minCoeff() >= -tol && std::abs(x.sum() - b.radius) <= tol;
    case SetKind::L2Ball:
      return x.norm() <= b.radius + tol;
  }
  return false;
}

}  // namespace

const char* to_string(SetKind kind) {
  switch (kind) {
    case SetKind::ColumnL1Ball: return "column_l1_ball";
    case SetKind::Simplex: return "simplex";
    case SetKind::L2Ball: return "l2_ball";
  }
  return "?";
}

double SetBlock::diameter() const {
  switch (kind) {
    case SetKind::ColumnL1Ball: return 2.0 * radius * std::sqrt(static_cast<double>(cols));
    case SetKind::Simplex: return size() > 1 ? radius * std::sqrt(2.0) : 0.0;
    case SetKind::L2Ball: return 2.0 * radius;
  }
  return 0.0;
}

FeasibleSet::FeasibleSet(Index rows, Index cols, std::vector<SetBlock> blocks)
    : rows_(rows), cols_(cols), blocks_(std::move(blocks)) {
  double sq = 0.0;
  for (const auto& b : blocks_) sq += b.diameter() * b.diameter();
  diameter_ = std::sqrt(sq);
}

static SetBlock checked_block(SetKind kind, double radius, Index rows, Index cols) {
  require(radius > 0.0 && std::isfinite(radius), ErrorCode::InvalidArgument,
          std::string(to_string(kind)) + ": radius/scale must be positive and finite");
  require(rows > 0 && cols > 0, ErrorCode::InvalidArgument,
          std::string(to_string(kind)) + ": dimensions must be positive");
  return SetBlock{kind, radius, 0, rows, cols};
}

FeasibleSet FeasibleSet::column_l1_ball(double radius, Index rows, Index cols) {
  return FeasibleSet(rows, cols, {checked_block(SetKind::ColumnL1Ball, radius, rows, cols)});
}

FeasibleSet FeasibleSet::simplex(double scale, Index rows, Index cols) {
  return FeasibleSet(rows, cols, {checked_block(SetKind::Simplex, scale, rows, cols)});
}

FeasibleSet FeasibleSet::l2_ball(double radius, Index rows, Index cols) {
  return FeasibleSet(rows, cols, {checked_block(SetKind::L2Ball, radius, rows, cols)});
}

FeasibleSet FeasibleSet::product(std::vector<SetBlock> blocks) {
  require(!blocks.empty(), ErrorCode::InvalidArgument, "product set needs at least one block");
  Index offset = 0;
  for (auto& b : blocks) {
    b = checked_block(b.kind, b.radius, b.rows, b.cols);
    b.offset = offset;
    offset += b.size();
  }
  return FeasibleSet(offset, 1, std::move(blocks));
}

std::string FeasibleSet::describe() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto& b = blocks_[i];
    if (i) os << " x ";
    os << to_string(b.kind) << "(r=" << b.radius << ", " << b.rows << "x" << b.cols << ")";
  }
  return os.str();
}

Point lmo(const FeasibleSet& set, const Point& direction) {
  check_dims(set, direction, "lmo");
  require(all_finite(direction), ErrorCode::InvalidArgument, "lmo: direction is not finite");
  Point out(set.rows(), set.cols());
  for (const auto& b : set.blocks()) lmo_block(b, view(direction, b), view(out, b));
  return out;
}

bool contains(const FeasibleSet& set, const Point& p, double tol) {
  check_dims(set, p, "contains");
  if (!all_finite(p)) return false;
  for (const auto& b : set.blocks()) {
    if (!contains_block(b, view(p, b), tol)) return false;
  }
  return true;
}

std::vector<Point> vertex_enumerate(const FeasibleSet& set) {
  require(!set.is_product(), ErrorCode::Unsupported, "vertex_enumerate: product sets unsupported");
  const SetBlock& b = set.blocks().front();
  require(b.size() <= 12, ErrorCode::InvalidArgument,
          "vertex_enumerate: instance too large (" + std::to_string(b.size()) + " > 12 entries)");
  std::vector<Point> out;
  switch (b.kind) {
    case SetKind::L2Ball:
      fail(ErrorCode::Unsupported, "vertex_enumerate: l2 ball has no finite vertex set");
    case SetKind::Simplex:
      for (Index i = 0; i < b.size(); ++i) {
        Point v = Point::Zero(b.rows, b.cols);
        v.data()[i] = b.radius;
        out.push_back(std::move(v));
      }
      break;
    case SetKind::ColumnL1Ball: {
      // Mixed-radix counter over the 2*rows signed choices of every column.
      const Index per_col = 2 * b.rows;
      std::vector<Index> digit(static_cast<std::size_t>(b.cols), 0);
      while (true) {
        Point v = Point::Zero(b.rows, b.cols);
        for (Index j = 0; j < b.cols; ++j) {
          const Index c = digit[static_cast<std::size_t>(j)];
          v(c / 2, j) = (c % 2 == 0) ? b.radius : -b.radius;
        }
        out.push_back(std::move(v));
        Index j = 0;
        for (; j < b.cols; ++j) {
          auto& dg = digit[static_cast<std::size_t>(j)];
          if (++dg < per_col) break;
          dg = 0;
        }
        if (j == b.cols) break;
      }
      break;
    }
  }
  return out;
}

Point initial_point(const FeasibleSet& set) {
  Point zero = Point::Zero(set.rows(), set.cols());
  if (contains(set, zero, 0.0)) return zero;
  return lmo(set, zero);
}

Point random_feasible_point(const FeasibleSet& set, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Point p = Point::Zero(set.rows(), set.cols());
  for (const auto& b : set.blocks()) {
    auto x = view(p, b);
    const bool boundary = unif(rng) < 0.125;
    switch (b.kind) {
      case SetKind::ColumnL1Ball:
        for (Index j = 0; j < b.cols; ++j) {
          for (Index i = 0; i < b.rows; ++i) x(i, j) = (unif(rng) < 0.5 ? -1.0 : 1.0) * expo(rng);
          const double n1 = x.col(j).lpNorm<1>();
          const double target = b.radius * (boundary ? 1.0 : unif(rng));
          if (n1 > 0.0) x.col(j) *= target / n1;
        }
        break;
      case SetKind::Simplex: {
        for (Index i = 0; i < b.size(); ++i) x.data()[i] = expo(rng);
        x *= b.radius / x.sum();
        break;
      }
      case SetKind::L2Ball: {
        for (Index i = 0; i < b.size(); ++i) x.data()[i] = gauss(rng);
        const double n2 = x.norm();
        const double target =
            b.radius * (boundary ? 1.0 : std::pow(unif(rng), 1.0 / static_cast<double>(b.size())));
        if (n2 > 0.0) x *= target / n2;
        break;
      }
    }
  }
  return p;
}

}  // namespace pfo
