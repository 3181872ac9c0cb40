#pragma once

#include "unitsel/error.hpp"
#include "unitsel/network.hpp"
#include "unitsel/network_io.hpp"
#include "unitsel/factor.hpp"
#include "unitsel/elimination.hpp"
#include "unitsel/result.hpp"
#include "unitsel/ve.hpp"
#include "unitsel/circuit.hpp"
#include "unitsel/circuit_io.hpp"
#include "unitsel/compile.hpp"
#include "unitsel/ac_solver.hpp"
#include "unitsel/objective_function.hpp"
#include "unitsel/objective.hpp"
#include "unitsel/oracle.hpp"
#include "unitsel/benchgen.hpp"

namespace unitsel {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace unitsel
