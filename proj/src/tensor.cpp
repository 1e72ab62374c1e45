#include "ocular/tensor.hpp"

#include <cmath>
#include <sstream>

namespace ocular {

bool Tensor::all_finite() const {
    for (double v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

std::string shape_str(const std::vector<int>& s) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << ", ";
        os << s[i];
    }
    os << ")";
    return os.str();
}

void require_finite(const Tensor& t, const std::string& where) {
    if (!t.all_finite()) throw std::runtime_error(where + ": non-finite value in tensor " + shape_str(t.shape));
}

}  // namespace ocular
