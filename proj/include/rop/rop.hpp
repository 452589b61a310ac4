// Umbrella include.
#ifndef ROP_ROP_HPP
#define ROP_ROP_HPP

#include "rop/config.hpp"
#include "rop/experiments.hpp"
#include "rop/model.hpp"
#include "rop/numerics.hpp"
#include "rop/oracle.hpp"
#include "rop/solvers_average.hpp"
#include "rop/solvers_outage.hpp"
#include "rop/solvers_peak.hpp"
#include "rop/verification.hpp"

#endif  // ROP_ROP_HPP
