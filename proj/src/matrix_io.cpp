#include "geodl/matrix_io.hpp"

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace geodl {

void write_matrix(std::ostream& os, const Matrix& m) {
    os << m.rows() << ' ' << m.cols() << '\n';
    const auto old_flags = os.flags();
    const auto old_precision = os.precision(17);
    os << std::setprecision(17);
    for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) {
            if (c) os << ' ';
            os << m(r, c);
        }
        os << '\n';
    }
    os.flags(old_flags);
    os.precision(old_precision);
}

Matrix read_matrix(std::istream& is) {
    long long rows = 0;
    long long cols = 0;
    if (!(is >> rows >> cols) || rows < 1 || cols < 1)
        throw Error("matrix header must be \"rows cols\" with both >= 1");
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < cols; ++c) {
            if (!(is >> m(r, c)))
                throw Error("matrix body truncated at row " + std::to_string(r) + ", column " +
                            std::to_string(c));
        }
    }
    if (!m.allFinite()) throw Error("matrix contains non-finite entries");
    return m;
}

std::string format_matrix(const Matrix& m) {
    std::ostringstream os;
    write_matrix(os, m);
    return os.str();
}

Matrix parse_matrix(const std::string& text) {
    std::istringstream is(text);
    return read_matrix(is);
}

}  // namespace geodl
