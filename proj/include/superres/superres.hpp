#pragma once

#include "superres/error.hpp"
#include "superres/parallel.hpp"
#include "superres/torus.hpp"
#include "superres/vandermonde.hpp"
#include "superres/combinatorics.hpp"
#include "superres/trig_poly.hpp"
#include "superres/bounds.hpp"
#include "superres/certificates.hpp"
#include "superres/music.hpp"
#include "superres/experiments.hpp"
#include "superres/io.hpp"
