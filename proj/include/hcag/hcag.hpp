#pragma once
// Umbrella header for the hcag library.

#include "hcag/abstraction.hpp"
#include "hcag/cost_model.hpp"
#include "hcag/errors.hpp"
#include "hcag/eval.hpp"
#include "hcag/generation.hpp"
#include "hcag/http_backend.hpp"
#include "hcag/kb.hpp"
#include "hcag/mock_backend.hpp"
#include "hcag/pipeline.hpp"
#include "hcag/ports.hpp"
#include "hcag/rational.hpp"
#include "hcag/retrieval.hpp"
#include "hcag/util.hpp"
