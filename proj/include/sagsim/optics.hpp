#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

namespace sagsim::optics {

using Complex = std::complex<double>;

/// Tolerance for algebraic identities (unitarity, norm preservation,
/// composition). Formulas are closed-form; only rounding error is expected.
inline constexpr double kAlgebraTol = 1e-12;

enum class Polarization { H, V };

const char* to_string(Polarization p);

/// One optical mode: a spatial path carrying one linear polarization.
struct ModeLabel {
  std::string spatial;
  Polarization pol;

  bool operator==(const ModeLabel&) const = default;
};

std::string to_string(const ModeLabel& m);

/// Ordered basis of optical modes. Order is fixed for the life of the basis:
/// spatial labels in declaration order, H before V within each label.
class ModeBasis {
 public:
  ModeBasis() = default;

  /// Basis spanned by the given spatial labels, each carrying H and V.
  /// Throws std::invalid_argument on duplicate labels.
  static ModeBasis over(const std::vector<std::string>& spatial_labels);

  std::size_t size() const { return labels_.size(); }
  const std::vector<ModeLabel>& labels() const { return labels_; }
  const ModeLabel& label(std::size_t i) const { return labels_[i]; }

  bool contains(const ModeLabel& m) const;
  /// Index of a mode; throws std::invalid_argument naming the label if absent.
  std::size_t index_of(const ModeLabel& m) const;

  /// "{A.H, A.V, B.H, B.V}" — used in diagnostics.
  std::string describe() const;

  bool operator==(const ModeBasis&) const = default;

 private:
  std::vector<ModeLabel> labels_;
};

/// Complex amplitudes over a mode basis. Squared norm is 1 for lossless
/// propagation and < 1 after attenuation.
struct ModeState {
  ModeBasis basis;
  std::vector<Complex> amplitudes;

  ModeState() = default;
  ModeState(ModeBasis b, std::vector<Complex> a);

  double squared_norm() const;
  Complex amplitude(const ModeLabel& m) const;
};

/// Linear (possibly lossy) operator between mode bases, plus the flags the
/// invariants are checked against. Matrix is row-major, output × input.
struct ComponentOp {
  ModeBasis input_basis;
  ModeBasis output_basis;
  std::vector<Complex> matrix;
  bool unitary = false;
  bool passive_lossy = false;

  ComponentOp() = default;
  ComponentOp(ModeBasis in, ModeBasis out, std::vector<Complex> m);

  Complex& at(std::size_t row, std::size_t col);
  Complex at(std::size_t row, std::size_t col) const;
  std::size_t rows() const { return output_basis.size(); }
  std::size_t cols() const { return input_basis.size(); }
};

/// Identity on a basis (flagged unitary).
ComponentOp identity_op(const ModeBasis& basis);

/// Matrix–vector product. Throws std::invalid_argument naming both bases if
/// the state does not live on the operator's input basis.
ModeState apply(const ComponentOp& op, const ModeState& state);

/// Matrix product: compose(second, first) acts like first-then-second.
/// Throws std::invalid_argument naming both bases on mismatch.
ComponentOp compose(const ComponentOp& second, const ComponentOp& first);

/// Sum of squared magnitudes over the given modes. Unknown labels throw.
double probability(const ModeState& state, std::span<const ModeLabel> modes);

/// Convenience: probability over both polarizations of one spatial label.
double probability_spatial(const ModeState& state, const std::string& spatial);

/// Reverse traversal of a reciprocal element: bases swapped, matrix
/// transposed (no conjugation).
ComponentOp transposed(const ComponentOp& op);

/// Embed a single-spatial-label operator into a larger basis, acting as the
/// identity on every other mode. The small op must map a label onto itself.
ComponentOp embed(const ComponentOp& op, const ModeBasis& full);

/// Numerically verify the flags an operator claims: M†M = I within tol for
/// unitary, largest singular value <= 1 + tol for passive-lossy.
bool is_unitary(const ComponentOp& op, double tol = kAlgebraTol);
bool is_passive(const ComponentOp& op, double tol = kAlgebraTol);

/// Explicit helper for comparisons "up to global phase"; global phase is
/// never normalized away automatically.
bool equal_up_to_global_phase(const ModeState& a, const ModeState& b,
                              double tol = kAlgebraTol);
bool equal_up_to_global_phase(const ComponentOp& a, const ComponentOp& b,
                              double tol = kAlgebraTol);

double max_abs_difference(const ModeState& a, const ModeState& b);

}  // namespace sagsim::optics
