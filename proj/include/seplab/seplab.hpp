// seplab.hpp — umbrella header.

#pragma once

#include "seplab/attacks.hpp"
#include "seplab/core.hpp"
#include "seplab/dataset.hpp"
#include "seplab/distance_classifier.hpp"
#include "seplab/lipschitz.hpp"
#include "seplab/network.hpp"
#include "seplab/reporting.hpp"
#include "seplab/separation.hpp"
#include "seplab/training.hpp"
