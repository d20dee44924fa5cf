#pragma once

#include <numbers>
#include <stdexcept>
#include <string>

namespace eqmin {

inline constexpr double pi = std::numbers::pi;
inline constexpr double half_pi = pi / 2.0;
inline constexpr double quarter_pi = pi / 4.0;

enum class System { DoubleProduct, TripleProduct };

struct SystemParams {
    System system = System::DoubleProduct;
    int n = 2;

    static SystemParams double_product(int n);
    static SystemParams triple_product();

    // throws std::invalid_argument when the dimension does not fit the system
    void validate() const;
    bool is_triple() const { return system == System::TripleProduct; }
    std::string describe() const;
};

// theta is stored as is; vartheta() is the shifted view about the bisector
struct State {
    double r = 0.0;
    double theta = 0.0;
    double alpha = 0.0;

    double vartheta() const { return theta - quarter_pi; }
};

inline State make_shifted(double r, double vartheta, double alpha) {
    return State{r, quarter_pi + vartheta, alpha};
}

struct Derivative {
    double dr = 0.0;
    double dtheta = 0.0;
    double dalpha = 0.0;
};

struct XyzState {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

struct XyzDerivative {
    double dx = 0.0;
    double dy = 0.0;
    double dz = 0.0;
};

}  // namespace eqmin
