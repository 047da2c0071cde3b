#pragma once

#include "graphon_lab/errors.hpp"
#include "graphon_lab/random.hpp"
#include "graphon_lab/graphon.hpp"
#include "graphon_lab/eigensolver.hpp"
#include "graphon_lab/spectrum.hpp"
#include "graphon_lab/sample.hpp"
#include "graphon_lab/matching.hpp"
#include "graphon_lab/decomp.hpp"
#include "graphon_lab/limits.hpp"
#include "graphon_lab/statistics.hpp"
#include "graphon_lab/experiment.hpp"
#include "graphon_lab/config.hpp"
#include "graphon_lab/output.hpp"
