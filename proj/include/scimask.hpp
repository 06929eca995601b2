#ifndef SCIMASK_HPP
#define SCIMASK_HPP

#include "scimask/codebook.hpp"
#include "scimask/core.hpp"
#include "scimask/errors.hpp"
#include "scimask/experiments.hpp"
#include "scimask/maskgen.hpp"
#include "scimask/parallel.hpp"
#include "scimask/rng.hpp"
#include "scimask/theory.hpp"

#endif // SCIMASK_HPP
