#pragma once

#include "csgdn/augmentation.hpp"
#include "csgdn/autodiff.hpp"
#include "csgdn/common.hpp"
#include "csgdn/config.hpp"
#include "csgdn/diffusion.hpp"
#include "csgdn/encoder.hpp"
#include "csgdn/error.hpp"
#include "csgdn/experiment.hpp"
#include "csgdn/features.hpp"
#include "csgdn/graph.hpp"
#include "csgdn/metrics.hpp"
#include "csgdn/mlp.hpp"
#include "csgdn/model.hpp"
#include "csgdn/objectives.hpp"
#include "csgdn/optimizer.hpp"
#include "csgdn/protocol.hpp"
#include "csgdn/training.hpp"
#include "csgdn/transfer.hpp"
