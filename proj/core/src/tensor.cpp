#include "collideq/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "collideq/errors.hpp"

namespace collideq {

namespace {

constexpr std::size_t kMaxQubits = 10;

std::string join_labels(const std::vector<std::string>& labels) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) os << ',';
    os << labels[i];
  }
  os << ')';
  return os.str();
}

void require_square(const ComplexMatrix& m, std::size_t dim, const char* what) {
  if (static_cast<std::size_t>(m.rows()) != dim ||
      static_cast<std::size_t>(m.cols()) != dim) {
    std::ostringstream os;
    os << what << ": expected " << dim << "x" << dim << " matrix, got " << m.rows()
       << "x" << m.cols();
    throw DimensionMismatch(os.str());
  }
}

// Bit positions (in the basis index) of the listed labels, in list order.
std::vector<std::size_t> bits_of(const QubitRegister& reg,
                                 std::span<const std::string> labels) {
  std::vector<std::size_t> bits;
  bits.reserve(labels.size());
  std::set<std::string_view> seen;
  for (const auto& l : labels) {
    if (!seen.insert(l).second) throw InvalidSubsystem("repeated label " + l);
    bits.push_back(reg.bit(reg.position(l)));
  }
  return bits;
}

std::size_t mask_of(const std::vector<std::size_t>& bits) {
  std::size_t mask = 0;
  for (auto b : bits) mask |= std::size_t{1} << b;
  return mask;
}

// Scatter the low bits of `value` onto the positions in `bits`
// (bits[0] receives the most significant bit of value).
std::size_t scatter(std::size_t value, const std::vector<std::size_t>& bits) {
  std::size_t out = 0;
  const std::size_t k = bits.size();
  for (std::size_t t = 0; t < k; ++t) {
    if ((value >> (k - 1 - t)) & 1u) out |= std::size_t{1} << bits[t];
  }
  return out;
}

std::size_t gather(std::size_t index, const std::vector<std::size_t>& bits) {
  std::size_t out = 0;
  const std::size_t k = bits.size();
  for (std::size_t t = 0; t < k; ++t) {
    if ((index >> bits[t]) & 1u) out |= std::size_t{1} << (k - 1 - t);
  }
  return out;
}

}  // namespace

bool approx_equal(const ComplexMatrix& a, const ComplexMatrix& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return max_abs(a - b) <= tol;
}

double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// QubitRegister

QubitRegister::QubitRegister(std::vector<std::string> labels)
    : labels_(std::move(labels)) {
  if (labels_.empty()) throw InvalidSubsystem("register needs at least one qubit");
  if (labels_.size() > kMaxQubits) throw InvalidSubsystem("register too large");
  std::set<std::string_view> seen;
  for (const auto& l : labels_) {
    if (l.empty()) throw InvalidSubsystem("empty qubit label");
    if (!seen.insert(l).second) {
      throw InvalidSubsystem("duplicate label " + l + " in " + join_labels(labels_));
    }
  }
}

QubitRegister::QubitRegister(std::initializer_list<std::string> labels)
    : QubitRegister(std::vector<std::string>(labels)) {}

bool QubitRegister::contains(std::string_view label) const noexcept {
  return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

std::size_t QubitRegister::position(std::string_view label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) {
    throw InvalidSubsystem("unknown subsystem " + std::string(label) + " in " +
                           join_labels(labels_));
  }
  return static_cast<std::size_t>(it - labels_.begin());
}

QubitRegister QubitRegister::subset(std::span<const std::string> keep) const {
  if (keep.empty()) throw InvalidSubsystem("empty subsystem selection");
  std::set<std::string_view> wanted;
  for (const auto& l : keep) {
    position(l);
    if (!wanted.insert(l).second) throw InvalidSubsystem("repeated label " + l);
  }
  std::vector<std::string> out;
  for (const auto& l : labels_) {
    if (wanted.contains(l)) out.push_back(l);
  }
  return QubitRegister(std::move(out));
}

QubitRegister QubitRegister::operator+(const QubitRegister& other) const {
  std::vector<std::string> all = labels_;
  all.insert(all.end(), other.labels_.begin(), other.labels_.end());
  return QubitRegister(std::move(all));
}

// ---------------------------------------------------------------------------
// Operators and states

HermitianOp::HermitianOp(QubitRegister reg, ComplexMatrix m)
    : reg_(std::move(reg)), m_(std::move(m)) {
  require_square(m_, reg_.dim(), "HermitianOp");
  if (max_abs(m_ - m_.adjoint()) > kEntryTolerance) {
    throw NotHermitian("operator is not Hermitian");
  }
}

UnitaryOp::UnitaryOp(QubitRegister reg, ComplexMatrix m)
    : reg_(std::move(reg)), m_(std::move(m)) {
  require_square(m_, reg_.dim(), "UnitaryOp");
  const auto n = m_.rows();
  if (max_abs(m_ * m_.adjoint() - ComplexMatrix::Identity(n, n)) > kStructuralTolerance) {
    throw NotUnitary("operator is not unitary");
  }
}

DensityMatrix::DensityMatrix(Trusted, QubitRegister reg, ComplexMatrix m)
    : reg_(std::move(reg)), m_(std::move(m)) {
  require_square(m_, reg_.dim(), "DensityMatrix");
}

DensityMatrix DensityMatrix::trusted(QubitRegister reg, ComplexMatrix m) {
  return DensityMatrix(Trusted{}, std::move(reg), std::move(m));
}

DensityMatrix::DensityMatrix(QubitRegister reg, ComplexMatrix m)
    : DensityMatrix(Trusted{}, std::move(reg), std::move(m)) {
  if (max_abs(m_ - m_.adjoint()) > kStructuralTolerance) {
    throw InvalidState("density matrix is not Hermitian");
  }
  if (std::abs(m_.trace() - Complex(1.0, 0.0)) > kStructuralTolerance) {
    throw InvalidState("density matrix trace differs from one");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -kStructuralTolerance) {
    throw InvalidState("density matrix has a negative eigenvalue");
  }
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix::trusted(a.reg() + b.reg(), kron(a.matrix(), b.matrix()));
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

ComplexMatrix partial_trace(const ComplexMatrix& m, const QubitRegister& reg,
                            std::span<const std::string> keep) {
  require_square(m, reg.dim(), "partial_trace");
  const QubitRegister kept = reg.subset(keep);
  std::vector<std::string> traced_labels;
  for (const auto& l : reg.labels()) {
    if (!kept.contains(l)) traced_labels.push_back(l);
  }
  const auto keep_bits = bits_of(reg, kept.labels());
  const auto trace_bits = bits_of(reg, traced_labels);
  const std::size_t dk = kept.dim();
  const std::size_t dt = std::size_t{1} << trace_bits.size();

  std::vector<std::size_t> keep_idx(dk), trace_idx(dt);
  for (std::size_t a = 0; a < dk; ++a) keep_idx[a] = scatter(a, keep_bits);
  for (std::size_t t = 0; t < dt; ++t) trace_idx[t] = scatter(t, trace_bits);

  ComplexMatrix out = ComplexMatrix::Zero(dk, dk);
  for (std::size_t a = 0; a < dk; ++a) {
    for (std::size_t b = 0; b < dk; ++b) {
      Complex sum{0.0, 0.0};
      for (std::size_t t = 0; t < dt; ++t) {
        sum += m(keep_idx[a] | trace_idx[t], keep_idx[b] | trace_idx[t]);
      }
      out(a, b) = sum;
    }
  }
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::string> keep) {
  QubitRegister kept = rho.reg().subset(keep);
  return DensityMatrix::trusted(std::move(kept),
                                partial_trace(rho.matrix(), rho.reg(), keep));
}

DensityMatrix partial_trace(const DensityMatrix& rho,
                            std::initializer_list<std::string> keep) {
  std::vector<std::string> k(keep);
  return partial_trace(rho, std::span<const std::string>(k));
}

ComplexMatrix partial_transpose(const ComplexMatrix& m, const QubitRegister& reg,
                                std::span<const std::string> part) {
  require_square(m, reg.dim(), "partial_transpose");
  if (part.empty() || part.size() >= reg.size()) {
    throw InvalidSubsystem("partial transpose needs a nonempty proper subset");
  }
  const std::size_t mask = mask_of(bits_of(reg, part));
  const auto d = static_cast<Eigen::Index>(reg.dim());
  ComplexMatrix out(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const auto ui = static_cast<std::size_t>(i);
      const auto uj = static_cast<std::size_t>(j);
      const auto ti = static_cast<Eigen::Index>((ui & ~mask) | (uj & mask));
      const auto tj = static_cast<Eigen::Index>((uj & ~mask) | (ui & mask));
      out(ti, tj) = m(i, j);
    }
  }
  return out;
}

ComplexMatrix partial_transpose(const DensityMatrix& rho,
                                std::span<const std::string> part) {
  return partial_transpose(rho.matrix(), rho.reg(), part);
}

EigenSystem eig_hermitian(const ComplexMatrix& h, double tol) {
  if (h.rows() != h.cols()) throw DimensionMismatch("eig_hermitian: non-square input");
  if (max_abs(h - h.adjoint()) > tol) throw NotHermitian("eig_hermitian: input is not Hermitian");
  // Symmetrize so round-off in the lower triangle cannot leak in.
  const ComplexMatrix sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(sym);
  if (es.info() != Eigen::Success) throw NotHermitian("eig_hermitian: solver failed");
  EigenSystem out;
  out.values.assign(es.eigenvalues().data(),
                    es.eigenvalues().data() + es.eigenvalues().size());
  out.vectors = es.eigenvectors();
  return out;
}

EigenSystem eig_hermitian(const HermitianOp& h) { return eig_hermitian(h.matrix()); }

UnitaryOp expm_i_hermitian(const HermitianOp& h, double t) {
  const auto es = eig_hermitian(h);
  const auto n = static_cast<Eigen::Index>(es.values.size());
  Eigen::VectorXcd phases(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    phases(k) = std::exp(Complex(0.0, -es.values[static_cast<std::size_t>(k)] * t));
  }
  ComplexMatrix u = es.vectors * phases.asDiagonal() * es.vectors.adjoint();
  return UnitaryOp(h.reg(), std::move(u));
}

ComplexMatrix embed(const ComplexMatrix& op, std::span<const std::string> on,
                    const QubitRegister& reg) {
  const auto on_bits = bits_of(reg, on);
  const std::size_t k = on_bits.size();
  if (k == 0) throw InvalidSubsystem("embed: empty subsystem list");
  require_square(op, std::size_t{1} << k, "embed");
  const std::size_t mask = mask_of(on_bits);
  const std::size_t d = reg.dim();
  const std::size_t dk = std::size_t{1} << k;

  std::vector<std::size_t> placed(dk);
  for (std::size_t s = 0; s < dk; ++s) placed[s] = scatter(s, on_bits);

  ComplexMatrix out = ComplexMatrix::Zero(static_cast<Eigen::Index>(d),
                                          static_cast<Eigen::Index>(d));
  for (std::size_t col = 0; col < d; ++col) {
    const std::size_t sub_in = gather(col, on_bits);
    const std::size_t rest = col & ~mask;
    for (std::size_t sub_out = 0; sub_out < dk; ++sub_out) {
      const Complex amp = op(static_cast<Eigen::Index>(sub_out),
                             static_cast<Eigen::Index>(sub_in));
      if (amp == Complex(0.0, 0.0)) continue;
      out(static_cast<Eigen::Index>(rest | placed[sub_out]),
          static_cast<Eigen::Index>(col)) = amp;
    }
  }
  return out;
}

ComplexMatrix embed(const ComplexMatrix& op, std::initializer_list<std::string> on,
                    const QubitRegister& reg) {
  std::vector<std::string> labels(on);
  return embed(op, std::span<const std::string>(labels), reg);
}

namespace pauli {

ComplexMatrix identity() { return ComplexMatrix::Identity(2, 2); }

ComplexMatrix x() {
  ComplexMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

ComplexMatrix y() {
  ComplexMatrix m(2, 2);
  m << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
  return m;
}

ComplexMatrix z() {
  ComplexMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

ComplexMatrix swap() {
  ComplexMatrix m = ComplexMatrix::Zero(4, 4);
  m(0, 0) = 1.0;
  m(1, 2) = 1.0;
  m(2, 1) = 1.0;
  m(3, 3) = 1.0;
  return m;
}

}  // namespace pauli

}  // namespace collideq
