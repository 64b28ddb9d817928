"""Plain numpy Adam on f(x) = sum_i a_i (x_i - b_i)^2 from x = 0."""
import numpy as np

a = np.array([1.0, 3.0, 0.5, 2.0])
b = np.array([0.7, -1.2, 2.0, 0.1])
x = np.zeros(4)
m = np.zeros(4)
v = np.zeros(4)
lr, b1, b2, eps = 1e-2, 0.9, 0.999, 1e-8
for t in range(1, 2001):
    g = 2 * a * (x - b)
    m = b1 * m + (1 - b1) * g
    v = b2 * v + (1 - b2) * g * g
    x = x - lr * (m / (1 - b1 ** t)) / (np.sqrt(v / (1 - b2 ** t)) + eps)
    if t in (1, 3, 100):
        print("x_after_%d " % t + " ".join("%.17g" % xi for xi in x))
print("final_loss %.17g" % float((a * (x - b) ** 2).sum()))
print("x " + " ".join("%.17g" % xi for xi in x))
