#include "sagsim/optics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace sagsim::optics {

const char* to_string(Polarization p) { return p == Polarization::H ? "H" : "V"; }

std::string to_string(const ModeLabel& m) { return m.spatial + "." + to_string(m.pol); }

ModeBasis ModeBasis::over(const std::vector<std::string>& spatial_labels) {
  std::set<std::string> seen;
  ModeBasis b;
  for (const auto& s : spatial_labels) {
    if (!seen.insert(s).second)
      throw std::invalid_argument("ModeBasis: duplicate spatial label '" + s + "'");
    b.labels_.push_back({s, Polarization::H});
    b.labels_.push_back({s, Polarization::V});
  }
  return b;
}

bool ModeBasis::contains(const ModeLabel& m) const {
  return std::find(labels_.begin(), labels_.end(), m) != labels_.end();
}

std::size_t ModeBasis::index_of(const ModeLabel& m) const {
  auto it = std::find(labels_.begin(), labels_.end(), m);
  if (it == labels_.end())
    throw std::invalid_argument("ModeBasis: unknown mode label " + to_string(m) +
                                " in basis " + describe());
  return static_cast<std::size_t>(it - labels_.begin());
}

std::string ModeBasis::describe() const {
  std::ostringstream os;
  os << "{";
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (i) os << ", ";
    os << to_string(labels_[i]);
  }
  os << "}";
  return os.str();
}

ModeState::ModeState(ModeBasis b, std::vector<Complex> a)
    : basis(std::move(b)), amplitudes(std::move(a)) {
  if (amplitudes.size() != basis.size())
    throw std::invalid_argument("ModeState: " + std::to_string(amplitudes.size()) +
                                " amplitudes for basis " + basis.describe());
}

double ModeState::squared_norm() const {
  double n = 0.0;
  for (const auto& a : amplitudes) n += std::norm(a);
  return n;
}

Complex ModeState::amplitude(const ModeLabel& m) const {
  return amplitudes[basis.index_of(m)];
}

ComponentOp::ComponentOp(ModeBasis in, ModeBasis out, std::vector<Complex> m)
    : input_basis(std::move(in)), output_basis(std::move(out)), matrix(std::move(m)) {
  if (matrix.size() != input_basis.size() * output_basis.size())
    throw std::invalid_argument("ComponentOp: matrix shape does not match bases " +
                                input_basis.describe() + " -> " + output_basis.describe());
}

Complex& ComponentOp::at(std::size_t row, std::size_t col) {
  return matrix[row * cols() + col];
}

Complex ComponentOp::at(std::size_t row, std::size_t col) const {
  return matrix[row * cols() + col];
}

ComponentOp identity_op(const ModeBasis& basis) {
  const std::size_t n = basis.size();
  std::vector<Complex> m(n * n, Complex{0.0, 0.0});
  for (std::size_t i = 0; i < n; ++i) m[i * n + i] = 1.0;
  ComponentOp op(basis, basis, std::move(m));
  op.unitary = true;
  op.passive_lossy = true;
  return op;
}

ModeState apply(const ComponentOp& op, const ModeState& state) {
  if (state.basis != op.input_basis)
    throw std::invalid_argument("apply: state basis " + state.basis.describe() +
                                " does not match operator input basis " +
                                op.input_basis.describe());
  std::vector<Complex> out(op.rows(), Complex{0.0, 0.0});
  for (std::size_t r = 0; r < op.rows(); ++r)
    for (std::size_t c = 0; c < op.cols(); ++c)
      out[r] += op.at(r, c) * state.amplitudes[c];
  return ModeState(op.output_basis, std::move(out));
}

ComponentOp compose(const ComponentOp& second, const ComponentOp& first) {
  if (first.output_basis != second.input_basis)
    throw std::invalid_argument("compose: first output basis " +
                                first.output_basis.describe() +
                                " does not match second input basis " +
                                second.input_basis.describe());
  const std::size_t rows = second.rows();
  const std::size_t cols = first.cols();
  const std::size_t mid = first.rows();
  std::vector<Complex> m(rows * cols, Complex{0.0, 0.0});
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t k = 0; k < mid; ++k) {
      const Complex s = second.at(r, k);
      if (s == Complex{0.0, 0.0}) continue;
      for (std::size_t c = 0; c < cols; ++c) m[r * cols + c] += s * first.at(k, c);
    }
  ComponentOp op(first.input_basis, second.output_basis, std::move(m));
  // Unitaries are flagged passive as well, so both flags compose by AND.
  op.unitary = first.unitary && second.unitary;
  op.passive_lossy = first.passive_lossy && second.passive_lossy;
  return op;
}

double probability(const ModeState& state, std::span<const ModeLabel> modes) {
  double p = 0.0;
  for (const auto& m : modes) p += std::norm(state.amplitudes[state.basis.index_of(m)]);
  return p;
}

double probability_spatial(const ModeState& state, const std::string& spatial) {
  const ModeLabel modes[2] = {{spatial, Polarization::H}, {spatial, Polarization::V}};
  return probability(state, modes);
}

ComponentOp transposed(const ComponentOp& op) {
  std::vector<Complex> m(op.matrix.size());
  for (std::size_t r = 0; r < op.rows(); ++r)
    for (std::size_t c = 0; c < op.cols(); ++c) m[c * op.rows() + r] = op.at(r, c);
  ComponentOp out(op.output_basis, op.input_basis, std::move(m));
  out.unitary = op.unitary;
  out.passive_lossy = op.passive_lossy;
  return out;
}

ComponentOp embed(const ComponentOp& op, const ModeBasis& full) {
  if (op.input_basis != op.output_basis)
    throw std::invalid_argument("embed: operator must map a basis onto itself");
  const std::size_t n = full.size();
  std::vector<Complex> m(n * n, Complex{0.0, 0.0});
  for (std::size_t i = 0; i < n; ++i) m[i * n + i] = 1.0;
  // Overwrite the block spanned by the small basis.
  std::vector<std::size_t> idx;
  idx.reserve(op.input_basis.size());
  for (const auto& lbl : op.input_basis.labels()) idx.push_back(full.index_of(lbl));
  for (std::size_t r = 0; r < op.rows(); ++r)
    for (std::size_t c = 0; c < op.cols(); ++c) m[idx[r] * n + idx[c]] = op.at(r, c);
  ComponentOp out(full, full, std::move(m));
  out.unitary = op.unitary;
  out.passive_lossy = op.passive_lossy;
  return out;
}

namespace {

// M†M as a dense row-major Hermitian matrix.
std::vector<Complex> gram(const ComponentOp& op) {
  const std::size_t n = op.cols();
  std::vector<Complex> g(n * n, Complex{0.0, 0.0});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Complex s{0.0, 0.0};
      for (std::size_t k = 0; k < op.rows(); ++k)
        s += std::conj(op.at(k, i)) * op.at(k, j);
      g[i * n + j] = s;
    }
  return g;
}

}  // namespace

bool is_unitary(const ComponentOp& op, double tol) {
  if (op.rows() != op.cols()) return false;
  const std::size_t n = op.cols();
  const auto g = gram(op);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const Complex expect = (i == j) ? Complex{1.0, 0.0} : Complex{0.0, 0.0};
      if (std::abs(g[i * n + j] - expect) > tol) return false;
    }
  return true;
}

bool is_passive(const ComponentOp& op, double tol) {
  // Largest singular value via power iteration on the (tiny) Gram matrix.
  const std::size_t n = op.cols();
  if (n == 0) return true;
  const auto g = gram(op);
  std::vector<Complex> v(n, Complex{1.0 / std::sqrt(static_cast<double>(n)), 0.0});
  double lambda = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<Complex> w(n, Complex{0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) w[i] += g[i * n + j] * v[j];
    double norm = 0.0;
    for (const auto& x : w) norm += std::norm(x);
    norm = std::sqrt(norm);
    if (norm == 0.0) return true;
    for (auto& x : w) x /= norm;
    lambda = norm;
    v = std::move(w);
  }
  return std::sqrt(lambda) <= 1.0 + tol;
}

bool equal_up_to_global_phase(const ModeState& a, const ModeState& b, double tol) {
  if (a.basis != b.basis) return false;
  // Phase from the largest-magnitude amplitude of a.
  std::size_t ref = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < a.amplitudes.size(); ++i)
    if (std::abs(a.amplitudes[i]) > best) {
      best = std::abs(a.amplitudes[i]);
      ref = i;
    }
  if (best <= tol) return max_abs_difference(a, b) <= tol;
  if (std::abs(b.amplitudes[ref]) <= tol) return false;
  const Complex phase = (b.amplitudes[ref] / a.amplitudes[ref]) /
                        std::abs(b.amplitudes[ref] / a.amplitudes[ref]);
  for (std::size_t i = 0; i < a.amplitudes.size(); ++i)
    if (std::abs(a.amplitudes[i] * phase - b.amplitudes[i]) > tol) return false;
  return true;
}

bool equal_up_to_global_phase(const ComponentOp& a, const ComponentOp& b, double tol) {
  if (a.input_basis != b.input_basis || a.output_basis != b.output_basis) return false;
  std::size_t ref = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < a.matrix.size(); ++i)
    if (std::abs(a.matrix[i]) > best) {
      best = std::abs(a.matrix[i]);
      ref = i;
    }
  if (best <= tol) {
    for (std::size_t i = 0; i < a.matrix.size(); ++i)
      if (std::abs(a.matrix[i] - b.matrix[i]) > tol) return false;
    return true;
  }
  if (std::abs(b.matrix[ref]) <= tol) return false;
  const Complex phase =
      (b.matrix[ref] / a.matrix[ref]) / std::abs(b.matrix[ref] / a.matrix[ref]);
  for (std::size_t i = 0; i < a.matrix.size(); ++i)
    if (std::abs(a.matrix[i] * phase - b.matrix[i]) > tol) return false;
  return true;
}

double max_abs_difference(const ModeState& a, const ModeState& b) {
  if (a.basis != b.basis)
    throw std::invalid_argument("max_abs_difference: bases differ: " +
                                a.basis.describe() + " vs " + b.basis.describe());
  double d = 0.0;
  for (std::size_t i = 0; i < a.amplitudes.size(); ++i)
    d = std::max(d, std::abs(a.amplitudes[i] - b.amplitudes[i]));
  return d;
}

}  // namespace sagsim::optics
