#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace geodl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Raised for violated preconditions and numerical failures across the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline bool all_finite(const Eigen::Ref<const Matrix>& m) {
    return m.allFinite();
}

/// Flips v so that its first entry of largest magnitude is positive.
/// Returns true when a flip happened.
inline bool canonicalize_sign(Eigen::Ref<Vector> v) {
    if (v.size() == 0) return false;
    Index best = 0;
    for (Index i = 1; i < v.size(); ++i)
        if (std::abs(v(i)) > std::abs(v(best))) best = i;
    if (v(best) < 0.0) {
        v = -v;
        return true;
    }
    return false;
}

/// Sign that canonicalize_sign would apply, without touching the vector.
inline double canonical_sign(const Eigen::Ref<const Vector>& v) {
    if (v.size() == 0) return 1.0;
    Index best = 0;
    for (Index i = 1; i < v.size(); ++i)
        if (std::abs(v(i)) > std::abs(v(best))) best = i;
    return v(best) < 0.0 ? -1.0 : 1.0;
}

}  // namespace geodl
