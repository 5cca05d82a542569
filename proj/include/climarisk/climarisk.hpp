#ifndef CLIMARISK_CLIMARISK_HPP
#define CLIMARISK_CLIMARISK_HPP

// Umbrella header.

#include "climarisk/clustering.hpp"
#include "climarisk/csv.hpp"
#include "climarisk/elasticity.hpp"
#include "climarisk/error.hpp"
#include "climarisk/json_writer.hpp"
#include "climarisk/matrix.hpp"
#include "climarisk/mcdm.hpp"
#include "climarisk/model_io.hpp"
#include "climarisk/panel.hpp"
#include "climarisk/parallel.hpp"
#include "climarisk/pipeline.hpp"
#include "climarisk/rng.hpp"
#include "climarisk/sampling.hpp"
#include "climarisk/stats.hpp"
#include "climarisk/svg.hpp"
#include "climarisk/svm.hpp"
#include "climarisk/version.hpp"

#endif // CLIMARISK_CLIMARISK_HPP
