#ifndef QUANTREP_QUANTREP_HPP
#define QUANTREP_QUANTREP_HPP

#include "calibration.hpp"
#include "core.hpp"
#include "dataset.hpp"
#include "diagnostics.hpp"
#include "isotonic.hpp"
#include "linear.hpp"
#include "losses.hpp"
#include "ood.hpp"
#include "quantile_model.hpp"
#include "serialize.hpp"
#include "shift.hpp"
#include "spline.hpp"

#endif
