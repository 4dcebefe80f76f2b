#pragma once

#include <diffmsc/component_tree.hpp>
#include <diffmsc/descriptors.hpp>
#include <diffmsc/detector.hpp>
#include <diffmsc/eigensolver.hpp>
#include <diffmsc/error.hpp>
#include <diffmsc/evaluation.hpp>
#include <diffmsc/laplacian.hpp>
#include <diffmsc/mesh.hpp>
#include <diffmsc/pipeline.hpp>
#include <diffmsc/primitives.hpp>
#include <diffmsc/spectral.hpp>
#include <diffmsc/spectral_cache.hpp>
#include <diffmsc/weighting.hpp>
