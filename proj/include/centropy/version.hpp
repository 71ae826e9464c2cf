#pragma once

#define CENTROPY_VERSION "0.1.0"
