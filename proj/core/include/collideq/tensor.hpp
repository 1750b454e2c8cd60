#pragma once

// Dense complex linear algebra over small multi-qubit registers.
//
// Tensor-factor convention: the leftmost label of a QubitRegister is the
// most significant bit of the basis index. Every routine in this header
// (kron, embed, partial_trace, partial_transpose) honours it.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace collideq {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

inline constexpr double kEntryTolerance = 1e-12;
inline constexpr double kStructuralTolerance = 1e-10;

bool approx_equal(const ComplexMatrix& a, const ComplexMatrix& b,
                  double tol = kEntryTolerance);

// Largest entry modulus.
double max_abs(const ComplexMatrix& m);

class QubitRegister {
 public:
  QubitRegister() = default;
  explicit QubitRegister(std::vector<std::string> labels);
  QubitRegister(std::initializer_list<std::string> labels);

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t dim() const noexcept { return std::size_t{1} << labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  bool contains(std::string_view label) const noexcept;
  // Tensor-factor position of `label`; throws InvalidSubsystem.
  std::size_t position(std::string_view label) const;
  // Bit of the basis index that carries qubit `pos`.
  std::size_t bit(std::size_t pos) const noexcept { return size() - 1 - pos; }

  // Sub-register of `keep`, in this register's order.
  QubitRegister subset(std::span<const std::string> keep) const;
  // Concatenation; labels must stay unique.
  QubitRegister operator+(const QubitRegister& other) const;

  bool operator==(const QubitRegister&) const = default;

 private:
  std::vector<std::string> labels_;
};

class HermitianOp {
 public:
  // Throws NotHermitian when ‖M − M†‖_max exceeds 1e-12.
  HermitianOp(QubitRegister reg, ComplexMatrix m);

  const QubitRegister& reg() const noexcept { return reg_; }
  const ComplexMatrix& matrix() const noexcept { return m_; }

 private:
  QubitRegister reg_;
  ComplexMatrix m_;
};

class UnitaryOp {
 public:
  // Throws NotUnitary when ‖UU† − 1‖_max exceeds 1e-10.
  UnitaryOp(QubitRegister reg, ComplexMatrix m);

  const QubitRegister& reg() const noexcept { return reg_; }
  const ComplexMatrix& matrix() const noexcept { return m_; }

 private:
  QubitRegister reg_;
  ComplexMatrix m_;
};

// Hermitian, positive semidefinite, unit-trace matrix over a register.
class DensityMatrix {
 public:
  // Validates Hermiticity, trace and positivity to 1e-10; throws InvalidState.
  DensityMatrix(QubitRegister reg, ComplexMatrix m);

  // Skips the spectral positivity check. Used on hot paths where the state
  // is produced by a CPTP map from a valid state; dimensions are still checked.
  static DensityMatrix trusted(QubitRegister reg, ComplexMatrix m);

  const QubitRegister& reg() const noexcept { return reg_; }
  const ComplexMatrix& matrix() const noexcept { return m_; }
  std::size_t dim() const noexcept { return reg_.dim(); }

 private:
  struct Trusted {};
  DensityMatrix(Trusted, QubitRegister reg, ComplexMatrix m);

  QubitRegister reg_;
  ComplexMatrix m_;
};

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

// Reduced operator on `keep`; works for any operator, not only states.
ComplexMatrix partial_trace(const ComplexMatrix& m, const QubitRegister& reg,
                            std::span<const std::string> keep);
DensityMatrix partial_trace(const DensityMatrix& rho,
                            std::span<const std::string> keep);
DensityMatrix partial_trace(const DensityMatrix& rho,
                            std::initializer_list<std::string> keep);

ComplexMatrix partial_transpose(const ComplexMatrix& m, const QubitRegister& reg,
                                std::span<const std::string> part);
ComplexMatrix partial_transpose(const DensityMatrix& rho,
                                std::span<const std::string> part);

struct EigenSystem {
  std::vector<double> values;  // ascending
  ComplexMatrix vectors;       // columns
};

EigenSystem eig_hermitian(const HermitianOp& h);
// Same decomposition for a raw matrix; throws NotHermitian on tolerance `tol`.
EigenSystem eig_hermitian(const ComplexMatrix& h, double tol = kEntryTolerance);

// exp(−i·h·t) through the eigendecomposition of h.
UnitaryOp expm_i_hermitian(const HermitianOp& h, double t);

// Lifts `op` (factor order = order of `on`) into `reg`, identity elsewhere.
ComplexMatrix embed(const ComplexMatrix& op, std::span<const std::string> on,
                    const QubitRegister& reg);
ComplexMatrix embed(const ComplexMatrix& op, std::initializer_list<std::string> on,
                    const QubitRegister& reg);

namespace pauli {
ComplexMatrix identity();
ComplexMatrix x();
ComplexMatrix y();
ComplexMatrix z();
// 4×4 SWAP.
ComplexMatrix swap();
}  // namespace pauli

}  // namespace collideq
