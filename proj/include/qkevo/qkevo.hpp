#pragma once

// Umbrella header: genetic search over quantum-kernel encoding circuits,
// exact statevector simulation, fidelity/ZZ/RBF kernels, dual SVM training
// and the benchmarking harness on top of them.

#include "qkevo/circuit.hpp"
#include "qkevo/dataset.hpp"
#include "qkevo/evolve.hpp"
#include "qkevo/experiment.hpp"
#include "qkevo/kernel.hpp"
#include "qkevo/preprocess.hpp"
#include "qkevo/reporting.hpp"
#include "qkevo/rng.hpp"
#include "qkevo/statevector.hpp"
#include "qkevo/svm.hpp"
