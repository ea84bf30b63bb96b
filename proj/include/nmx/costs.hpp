#pragma once

#include "nmx/model_io.hpp"

namespace nmx {

// Folds stage costs into the state: states at t become reachable pairs (x, a) with a the cost
// accumulated before t, named "x|a"; terminal cost is a + d_T(x). The information structure is
// unchanged apart from initial cells, which are mapped to the pairs (x0, 0). Throws ResourceError
// when some time has more than `max_states` pairs.
ModelFile to_terminal(const SystemModel& model, const InfoStructure& info, std::size_t max_states = 1'000'000);

}  // namespace nmx
