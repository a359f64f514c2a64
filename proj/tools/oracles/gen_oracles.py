"""Reference values for tests/test_oracle.cpp.

Computed with numpy / torch / scikit-learn, independently of the C++ code.
Run: python3 tools/oracles/gen_oracles.py > /tmp/oracle_values.txt
"""
import numpy as np
import torch
from sklearn.metrics import roc_auc_score

torch.set_default_dtype(torch.float64)
M64 = (1 << 64) - 1


def out(name, values):
    vals = np.atleast_1d(np.asarray(values, dtype=np.float64)).ravel()
    print(f"{name} = {{" + ", ".join(repr(float(v)) for v in vals) + "}")


# --- rng: xoshiro256** seeded by splitmix64 ---
def splitmix(state):
    state = (state + 0x9E3779B97F4A7C15) & M64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M64
    return state, z ^ (z >> 31)


def rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & M64


class Xoshiro:
    def __init__(self, seed):
        st = seed
        self.s = []
        for _ in range(4):
            st, v = splitmix(st)
            self.s.append(v)

    def next(self):
        s = self.s
        result = (rotl((s[1] * 5) & M64, 7) * 9) & M64
        t = (s[1] << 17) & M64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = rotl(s[3], 45)
        return result


r = Xoshiro(42)
print("rng_u64 = {" + ", ".join(f"{r.next()}ULL" for _ in range(4)) + "}")
r = Xoshiro(42)
out("rng_uniform", [(r.next() >> 11) * 2.0 ** -53 for _ in range(3)])
r = Xoshiro(7)
normals = []
for _ in range(2):
    u1 = ((r.next() >> 11) + 1) * 2.0 ** -53
    u2 = (r.next() >> 11) * 2.0 ** -53
    rad = np.sqrt(-2.0 * np.log(u1))
    normals += [rad * np.cos(2 * np.pi * u2), rad * np.sin(2 * np.pi * u2)]
out("rng_normal", normals)

# --- fixed B-cos network ---
W0 = np.array([[0.5, -0.2, 0.3], [0.1, 0.8, -0.4], [-0.6, 0.2, 0.7], [0.3, 0.3, 0.3]])
W1 = np.array([[0.4, -0.5, 0.2, 0.9], [-0.3, 0.6, 0.1, -0.2]])
B = [1.5, 2.0]
x = np.array([0.9, -0.4, 1.3])


def bcos_layer(W, a, b):
    cos = W @ a / (np.linalg.norm(W, axis=1) * np.linalg.norm(a))
    return (W @ a) * np.abs(cos) ** (b - 1), cos


h, c0 = bcos_layer(W0, x, B[0])
z, c1 = bcos_layer(W1, h, B[1])
out("net_hidden", h)
out("net_logits", z)
E0 = W0 * (np.abs(c0) ** (B[0] - 1))[:, None]
E1 = W1 * (np.abs(c1) ** (B[1] - 1))[:, None]
theta = E1 @ E0
out("net_collapse0", theta.ravel())
out("net_collapse1", E1.ravel())


def cosv(a, b):
    return a @ b / (np.linalg.norm(a) * np.linalg.norm(b))


out("net_ens0", [1 - cosv(theta[0], x), 1 - cosv(theta[1], x)])
out("net_ens1", [1 - cosv(E1[0], h), 1 - cosv(E1[1], h)])

# gradients of the per-node logistic loss through torch autograd
for label in (0, 1):
    w0 = torch.tensor(W0, requires_grad=True)
    w1 = torch.tensor(W1, requires_grad=True)
    xt = torch.tensor(x)

    def layer(W, a, b):
        d = W @ a
        cos = d / (W.norm(dim=1) * a.norm())
        return d * cos.abs() ** (b - 1)

    zz = layer(w1, layer(w0, xt, B[0]), B[1])
    target = torch.zeros(2)
    target[label] = 1.0
    loss = torch.nn.functional.binary_cross_entropy_with_logits(zz, target, reduction="sum")
    loss.backward()
    out(f"grad_loss_{label}", [loss.item()])
    out(f"grad_w0_{label}", w0.grad.numpy())
    out(f"grad_w1_{label}", w1.grad.numpy())

# --- numerics ---
A = np.array([[4.0, 1.2, -0.6, 0.3], [1.2, 3.0, 0.4, -0.2], [-0.6, 0.4, 2.5, 0.8], [0.3, -0.2, 0.8, 1.9]])
out("chol", np.linalg.cholesky(A))
D = np.array([[2.0, 0.1, -1.0], [1.5, -0.3, 0.2], [-0.7, 0.9, 1.1], [0.3, 0.4, -0.5],
              [-1.8, -0.2, 0.6], [0.9, 1.6, -0.1], [-0.4, -1.1, 0.8], [1.1, 0.5, 0.0]])
mu = D.mean(axis=0)
cov = np.cov(D, rowvar=False)
vals, vecs = np.linalg.eigh(cov)
order = np.argsort(vals)[::-1][:2]
comps = vecs[:, order].T
for i in range(2):
    if comps[i, np.argmax(np.abs(comps[i]))] < 0:
        comps[i] = -comps[i]
out("pca_components", comps)
out("pca_projected", (D - mu) @ comps.T)
out("gauss_mean", mu)
out("gauss_cov", cov)

# --- scoring / eval ---
bank = D
q = np.array([0.2, 0.3, -0.1])
dist = np.sort(np.linalg.norm(bank - q, axis=1))
out("ffs_k1_k2_k3", [dist[:1].sum(), dist[:2].sum(), dist[:3].sum()])
scores = np.array([0.3, 0.7, 0.7, 0.1, 0.9, 0.5, 0.5, 0.2, 0.8, 0.4, 0.7, 0.6])
labels = np.array([0, 1, 0, 0, 1, 1, 0, 0, 1, 0, 1, 1])
out("auroc_ties", [roc_auc_score(labels, scores)])
vals = np.array([0.2, 1.7, 0.9, 3.1, 0.4])
out("zscore", [vals.mean(), vals.std()])
