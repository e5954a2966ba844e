#include "sogpe/spinor.hpp"

#include <utility>

#include "sogpe/errors.hpp"

namespace sogpe {

SpinorField::SpinorField(SpacePtr space, Vec coeffs) : space_(std::move(space)), coeffs_(std::move(coeffs)) {
  if (!space_) throw SpaceMismatch("spinor field without a space");
  if (coeffs_.size() != 4 * static_cast<Eigen::Index>(space_->dofs())) {
    throw SpaceMismatch("spinor coefficient vector must have length 4N");
  }
}

SpinorField SpinorField::zero(SpacePtr space) {
  const auto n = 4 * static_cast<Eigen::Index>(space->dofs());
  return {std::move(space), Vec::Zero(n)};
}

Vec complex_scale(const Vec& coeffs, std::complex<double> c) {
  const Eigen::Index n = coeffs.size() / 4;
  Vec out(coeffs.size());
  for (int comp = 0; comp < 2; ++comp) {
    const auto re = coeffs.segment(2 * comp * n, n);
    const auto im = coeffs.segment((2 * comp + 1) * n, n);
    out.segment(2 * comp * n, n) = c.real() * re - c.imag() * im;
    out.segment((2 * comp + 1) * n, n) = c.imag() * re + c.real() * im;
  }
  return out;
}

SpinorField SpinorField::scaled(std::complex<double> c) const { return {space_, complex_scale(coeffs_, c)}; }

bool SpinorField::same_space(const SpinorField& other) const {
  return space_ == other.space_ ||
         (space_ && other.space_ && space_->order() == other.space_->order() &&
          space_->domain() == other.space_->domain());
}

}  // namespace sogpe
