#pragma once

// Core library: scalars through krylov. Serialization (io.hpp) and the harness
// additionally need the vendored single-header JSON/CLI libraries.

#include "scalars.hpp"
#include "linalg.hpp"
#include "spectral.hpp"
#include "ensembles.hpp"
#include "lanczos.hpp"
#include "measures.hpp"
#include "orthopoly.hpp"
#include "stability.hpp"
#include "krylov.hpp"
