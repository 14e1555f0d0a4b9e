#ifndef LFIV_LFIV_HPP
#define LFIV_LFIV_HPP

#include "lfiv/error.hpp"
#include "lfiv/data.hpp"
#include "lfiv/kernels.hpp"
#include "lfiv/gram.hpp"
#include "lfiv/landweber.hpp"
#include "lfiv/estimators.hpp"
#include "lfiv/inference.hpp"
#include "lfiv/dgp.hpp"
#include "lfiv/montecarlo.hpp"

#endif
