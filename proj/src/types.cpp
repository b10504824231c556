#include "qmc/types.hpp"

#include <algorithm>
#include <set>

#include "qmc/linops.hpp"

namespace qmc {

SubsystemShape::SubsystemShape(std::vector<int> d, std::vector<std::string> l)
    : dims(std::move(d)), labels(std::move(l)) {
  if (dims.size() != labels.size())
    throw ShapeError("SubsystemShape: dims/labels length mismatch");
  for (int x : dims)
    if (x <= 0) throw ShapeError("SubsystemShape: nonpositive dimension");
  std::set<std::string> seen(labels.begin(), labels.end());
  if (seen.size() != labels.size())
    throw ShapeError("SubsystemShape: duplicate labels");
}

int SubsystemShape::total_dim() const {
  int d = 1;
  for (int x : dims) d *= x;
  return d;
}

int SubsystemShape::index_of(const std::string& label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw ShapeError("unknown label: " + label);
  return static_cast<int>(it - labels.begin());
}

bool SubsystemShape::has_label(const std::string& label) const {
  return std::find(labels.begin(), labels.end(), label) != labels.end();
}

SubsystemShape SubsystemShape::subshape(
    const std::vector<std::string>& keep) const {
  std::vector<int> d;
  std::vector<std::string> l;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (std::find(keep.begin(), keep.end(), labels[i]) != keep.end()) {
      d.push_back(dims[i]);
      l.push_back(labels[i]);
    }
  }
  return SubsystemShape(std::move(d), std::move(l));
}

DensityOperator::DensityOperator(Mat m, SubsystemShape s, double tol)
    : matrix(std::move(m)), shape(std::move(s)), herm_tol(tol) {
  if (matrix.rows() != matrix.cols())
    throw ValidationError("DensityOperator: matrix not square");
  if (shape.total_dim() != matrix.rows())
    throw ShapeError("DensityOperator: shape does not match matrix dimension");
  if (!matrix.allFinite())
    throw ValidationError("DensityOperator: non-finite entries");
  double herm_res = (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
  if (herm_res > herm_tol)
    throw ValidationError("DensityOperator: not Hermitian, residual " +
                          std::to_string(herm_res));
  if (std::abs(matrix.trace() - Cplx(1.0)) > herm_tol)
    throw ValidationError("DensityOperator: trace != 1");
  auto es = hermitian_eig(matrix);
  if (es.eigenvalues.minCoeff() < -herm_tol)
    throw ValidationError("DensityOperator: negative eigenvalue " +
                          std::to_string(es.eigenvalues.minCoeff()));
}

DensityOperator DensityOperator::unlabeled(Mat m, double tol) {
  int d = static_cast<int>(m.rows());
  return DensityOperator(std::move(m), SubsystemShape({d}, {"s"}), tol);
}

}  // namespace qmc
