#ifndef ANNEALED_ISING_HPP
#define ANNEALED_ISING_HPP

#include "annealed_ising/errors.hpp"
#include "annealed_ising/numeric.hpp"
#include "annealed_ising/weights.hpp"
#include "annealed_ising/model.hpp"
#include "annealed_ising/meanfield.hpp"
#include "annealed_ising/criticality.hpp"
#include "annealed_ising/hubbard_stratonovich.hpp"
#include "annealed_ising/limit_law.hpp"
#include "annealed_ising/enumerate.hpp"
#include "annealed_ising/sampler.hpp"

#endif  // ANNEALED_ISING_HPP
