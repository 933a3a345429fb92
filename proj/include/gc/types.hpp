#pragma once

#include <Eigen/Dense>
#include <complex>

namespace gc {

using Cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;

}  // namespace gc
