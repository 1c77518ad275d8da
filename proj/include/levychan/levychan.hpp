#pragma once

// Scalar Levy channels, their estimation losses, and numerical certification
// of the information-estimation identities they satisfy.

#include "levychan/channel.hpp"
#include "levychan/errors.hpp"
#include "levychan/identities.hpp"
#include "levychan/info.hpp"
#include "levychan/loss.hpp"
#include "levychan/mc.hpp"
#include "levychan/output_expectation.hpp"
#include "levychan/posterior.hpp"
#include "levychan/prior.hpp"
#include "levychan/quadrature.hpp"
#include "levychan/suite.hpp"
