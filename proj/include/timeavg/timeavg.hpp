// Umbrella header.

#pragma once

#include "timeavg/linalg.hpp"
#include "timeavg/gellmann.hpp"
#include "timeavg/fourier.hpp"
#include "timeavg/hamiltonian.hpp"
#include "timeavg/averaging.hpp"
#include "timeavg/harmonic.hpp"
#include "timeavg/propagate.hpp"
#include "timeavg/raman.hpp"
#include "timeavg/spectral.hpp"
#include "timeavg/scenario.hpp"
