#pragma once

// Umbrella header.

#include "phnode/linalg.hpp"
#include "phnode/core_ph.hpp"
#include "phnode/quadham.hpp"
#include "phnode/node.hpp"
#include "phnode/node_analysis.hpp"
#include "phnode/sbp.hpp"
#include "phnode/discretize_1d.hpp"
#include "phnode/models.hpp"
#include "phnode/timeint.hpp"
#include "phnode/model_file.hpp"
