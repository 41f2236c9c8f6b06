#pragma once

// Forwarding header so sources can use the upstream include path while the
// single-header library lives flat in vendor/.
#include "../../vendor/json.hpp"
