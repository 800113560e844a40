#pragma once

// Model texts shipped with the library. The files under models/ carry the
// same content.

#include <string_view>

namespace dscm::fixtures {

/// Four coupled processes: X1, X3 driven by one Brownian motion W, X2 by a
/// Poisson process N, and X4 integrating against X2.
inline constexpr std::string_view example1 = R"(# X1 -> X2 -> X3 -> X1 feedback loop; X2 is the integrator of X4.
system {
  exogenous W: brownian;
  exogenous N: poisson(2);
  time s = 0.4;
  time t = 0.7;
  process X1 {
    init = normal(0, 1);
    alpha = {X1, X3};
    beta = {W};
    g = [0.5 + 0.2 * sin(X1 + X3)];
    markov = true;
  }
  process X2 {
    init = normal(0, 1);
    alpha = {X1, X2};
    beta = {N};
    g = [0.3 * sin(X1) - 0.1 * X2];
    markov = true;
  }
  process X3 {
    init = normal(0, 1);
    alpha = {X2, X3};
    beta = {W};
    g = [1 + 0.5 * sin(X2 - X3)];
    markov = true;
  }
  process X4 {
    init = normal(0, 1);
    alpha = {X4};
    beta = {X2};
    g = [min(1, max(-1, X4))];
    markov = true;
  }
  horizon 1;
}
)";

/// Example 1 with X3 integrating against X2, which shares its cycle.
inline constexpr std::string_view example1_mutated = R"(system {
  exogenous W: brownian;
  exogenous N: poisson(2);
  process X1 {
    init = normal(0, 1);
    alpha = {X1, X3};
    beta = {W};
    g = [0.5 + 0.2 * sin(X1 + X3)];
    markov = true;
  }
  process X2 {
    init = normal(0, 1);
    alpha = {X1, X2};
    beta = {N};
    g = [0.3 * sin(X1) - 0.1 * X2];
    markov = true;
  }
  process X3 {
    init = normal(0, 1);
    alpha = {X3};
    beta = {X2};
    g = [1 + 0.5 * sin(X3)];
    markov = true;
  }
  process X4 {
    init = normal(0, 1);
    alpha = {X4};
    beta = {X2};
    g = [min(1, max(-1, X4))];
    markov = true;
  }
  horizon 1;
}
)";

/// Linear-Gaussian system with the structure of example1: drifts against a
/// shared clock, X2 driven by its own Brownian motion B.
inline constexpr std::string_view example1_linear = R"(system {
  exogenous W: brownian;
  exogenous B: brownian;
  exogenous clock: time;
  time s = 0.4;
  time t = 0.8;
  process X1 {
    init = normal(0, 1);
    alpha = {X1, X3};
    beta = {clock, W};
    g = [-X1 + X3, 1];
    markov = true;
  }
  process X2 {
    init = normal(0, 1);
    alpha = {X1, X2};
    beta = {clock, B};
    g = [-X2 + X1, 1];
    markov = true;
  }
  process X3 {
    init = normal(0, 1);
    alpha = {X2, X3};
    beta = {clock, W};
    g = [-X3 + X2, 1];
    markov = true;
  }
  process X4 {
    init = normal(0, 1);
    alpha = {X4};
    beta = {clock, X2};
    g = [-X4, 1];
    markov = true;
  }
  horizon 1;
}
)";

/// Ornstein-Uhlenbeck process with theta = 1, mu = 0.5, sigma = 0.8.
inline constexpr std::string_view ornstein_uhlenbeck = R"(system {
  exogenous B: brownian;
  exogenous clock: time;
  process X {
    init = constant(2);
    alpha = {X};
    beta = {clock, B};
    g = [1 * (0.5 - X), 0.8];
    markov = true;
  }
  horizon 1;
}
)";

/// Counting process with unit jumps at rate 3.
inline constexpr std::string_view poisson_counter = R"(system {
  exogenous N: poisson(3);
  process X {
    init = constant(0);
    alpha = {};
    beta = {N};
    g = [1];
  }
  horizon 1;
}
)";

/// Chain Y1 -> Y2 -> Y3 with independent Brownian noise and a shared clock.
inline constexpr std::string_view chain = R"(system {
  exogenous B1: brownian;
  exogenous B2: brownian;
  exogenous B3: brownian;
  exogenous clock: time;
  process Y1 {
    init = normal(0, 1);
    alpha = {Y1};
    beta = {clock, B1};
    g = [-Y1, 1];
    markov = true;
  }
  process Y2 {
    init = normal(0, 1);
    alpha = {Y1, Y2};
    beta = {clock, B2};
    g = [Y1 - Y2, 1];
    markov = true;
  }
  process Y3 {
    init = normal(0, 1);
    alpha = {Y2, Y3};
    beta = {clock, B3};
    g = [Y2 - Y3, 1];
    markov = true;
  }
  horizon 1;
}
)";

}  // namespace dscm::fixtures
