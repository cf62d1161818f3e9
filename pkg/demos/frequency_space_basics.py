# %% [markdown]
# Frequency-space basics: transform a model, drop high-frequency
# coefficients, and look at what that costs in reconstruction quality.

# %%
import numpy as np

from fedft import (
    LearnerSpec, gaussian_model, init_params, inverse_model, model_stats,
    payload_megabytes, prune, reconstruction_error, transform_model, densify,
)

# %%
# A softmax regression for 784 features and 10 classes has a 784x10 weight
# matrix and a 10-long bias.  The DCT-IV keeps every shape.
spec = LearnerSpec(input_dim=784, num_classes=10)
w = gaussian_model([(784, 10), (10,)], stddev=0.1, seed=0,
                   names=["layer0.weight", "layer0.bias"])
f = transform_model(w)
print("shapes:", f.shapes)
print("round-trip max/mean abs error:", reconstruction_error(w))

# %%
# Coefficients grow by N/2 in energy per axis (unnormalised kernel).
energy_w = (w.flatten() ** 2).sum()
energy_f = (f.params.flatten() ** 2).sum()
print(f"energy ratio {energy_f / energy_w:.3f} (784/2 * 10/2 = {784 / 2 * 10 / 2:.0f} for the weight)")

# %%
# Pruning drops the trailing part of every row's last axis.  The upload only
# carries the kept prefix.
for alpha in (0.0, 0.1, 0.2, 0.3, 0.5):
    u = prune(f, alpha)
    back = inverse_model(densify(u))
    err = np.abs((back - w).flatten()).mean()
    print(f"alpha {alpha:.1f}: realized {u.alpha_realized:.3f}, "
          f"{payload_megabytes(u):.5f} MB, mean abs error {err:.4f}")

# %%
# Reconstruction error after pruning grows with the spread of the weights,
# which is why sending a low-variance update beats sending the full model.
for sd in (0.1, 0.2, 0.3, 0.4, 0.5):
    m = gaussian_model([(784, 10), (10,)], stddev=sd, seed=1)
    lossy = inverse_model(densify(prune(transform_model(m), 0.2)))
    print(f"stddev {sd:.1f}: variance {model_stats(m)[1]:.3f}, "
          f"mean abs error at alpha 0.2 {np.abs((lossy - m).flatten()).mean():.4f}")
