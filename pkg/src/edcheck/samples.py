"""Program generators for the benchmark families.

Each function renders a program in the toy language at a given size.  The
families mirror classic event-driven benchmark shapes: a buyer/seller
negotiation, broadcast consensus, mutual counting, a message loop passing a
token between handlers, and a scatter/gather sparse-matrix count.  All of
them write every shared variable before any handler can read it, so every
seeded run induces a well-formed full trace.
"""

from __future__ import annotations


def buyers(n: int = 2) -> str:
    """One seller quotes a price; n buyers add contributions in a ring and
    the last one places the order."""
    lines = ["vars price contrib ordered"]
    lines.append("handler seller regs s init seller_boot")
    for k in range(1, n + 1):
        lines.append(f"handler buyer{k} regs b t init buyer{k}_idle")
    lines += [
        "msg seller_boot on seller",
        "  s = 10",
        "  price = s",
        "  s = 0",
        "  contrib = s",
        "  post buyer1 quote1",
        "  last",
        "msg seller_order on seller",
        "  s = contrib",
        "  ordered = s",
        "  last",
    ]
    for k in range(1, n + 1):
        nxt = (f"post buyer{k + 1} quote{k + 1}" if k < n
               else "post seller seller_order")
        lines += [
            f"msg buyer{k}_idle on buyer{k}",
            "  last",
            f"msg quote{k} on buyer{k}",
            "  b = price",
            "  t = contrib",
            f"  t = t + {4 + k}",
            "  contrib = t",
            f"  {nxt}",
            "  last",
        ]
    return "\n".join(lines) + "\n"


def consensus(n: int = 2) -> str:
    """Every node writes its value and broadcasts a vote to all nodes; each
    node folds received values into a running maximum and decides after the
    last vote."""
    lines = ["vars " + " ".join(f"val{k}" for k in range(1, n + 1))
             + " " + " ".join(f"dec{k}" for k in range(1, n + 1))]
    for k in range(1, n + 1):
        lines.append(f"handler node{k} regs best seen v init boot{k}")
    for k in range(1, n + 1):
        lines += [
            f"msg boot{k} on node{k}",
            f"  v = {10 + k}",
            f"  val{k} = v",
            "  best = 0",
            "  seen = 0",
        ]
        lines += [f"  post node{j} vote_{k}_to_{j}"
                  for j in range(1, n + 1)]
        lines.append("  last")
    for k in range(1, n + 1):
        for j in range(1, n + 1):
            lines += [
                f"msg vote_{k}_to_{j} on node{j}",
                f"  v = val{k}",
                "  if v <= best goto skip",
                "  best = v",
                "skip: seen = seen + 1",
                f"  if seen < {n} goto wait",
                f"  dec{j} = best",
                "wait: last",
            ]
    return "\n".join(lines) + "\n"


def counting(n: int = 2) -> str:
    """Each handler messages every other handler and finally itself; foreign
    messages stamp the receiver's slot, the self message reads it back."""
    lines = ["vars " + " ".join(f"from{k}" for k in range(1, n + 1))]
    for k in range(1, n + 1):
        lines.append(f"handler c{k} regs r init start{k}")
    for k in range(1, n + 1):
        lines += [
            f"msg start{k} on c{k}",
            "  r = 0",
            f"  from{k} = r",
        ]
        lines += [f"  post c{j} mark_{k}_on_{j}"
                  for j in range(1, n + 1) if j != k]
        lines += [f"  post c{k} check{k}", "  last"]
    for k in range(1, n + 1):
        for j in range(1, n + 1):
            if j == k:
                continue
            lines += [
                f"msg mark_{k}_on_{j} on c{j}",
                f"  r = {k}",
                f"  from{j} = r",
                "  last",
            ]
        lines += [
            f"msg check{k} on c{k}",
            f"  r = from{k}",
            "  last",
        ]
    return "\n".join(lines) + "\n"


def message_loop(n: int = 2, chains: int = 2) -> str:
    """Handlers pass increment tokens around a ring until the shared counter
    reaches chains * n * n."""
    limit = chains * n * n
    lines = ["vars counter"]
    for k in range(1, n + 1):
        lines.append(f"handler loop{k} regs a init seed{k}")
    lines += ["msg seed1 on loop1", "  a = 0", "  counter = a"]
    lines += ["  post loop1 hop1"] * chains
    lines.append("  last")
    for k in range(2, n + 1):
        lines += [f"msg seed{k} on loop{k}", "  last"]
    for k in range(1, n + 1):
        nxt = k % n + 1
        lines += [
            f"msg hop{k} on loop{k}",
            "  a = counter",
            "  a = a + 1",
            "  counter = a",
            f"  if {limit} <= a goto stop",
            f"  post loop{nxt} hop{nxt}",
            "stop: last",
        ]
    return "\n".join(lines) + "\n"


def sparsemat(rows: int = 2, workers: int = 2) -> str:
    """A master scatters per-row count tasks to workers, which fold nonzero
    counts into a shared total and report back."""
    lines = ["vars total " + " ".join(f"cell{i}" for i in range(1, rows + 1))]
    lines.append("handler master regs m init scatter")
    for w in range(1, workers + 1):
        lines.append(f"handler worker{w} regs v t init widle{w}")
    lines += ["msg scatter on master", "  m = 0", "  total = m"]
    for i in range(1, rows + 1):
        lines += [f"  m = {i % 2}", f"  cell{i} = m"]
    for i in range(1, rows + 1):
        w = (i - 1) % workers + 1
        lines.append(f"  post worker{w} row{i}")
    lines.append("  last")
    for w in range(1, workers + 1):
        lines += [f"msg widle{w} on worker{w}", "  last"]
    for i in range(1, rows + 1):
        w = (i - 1) % workers + 1
        lines += [
            f"msg row{i} on worker{w}",
            f"  v = cell{i}",
            "  t = total",
            "  if v == 0 goto report",
            "  t = t + 1",
            "  total = t",
            "report: post master done" + str(i),
            "  last",
        ]
    for i in range(1, rows + 1):
        lines += [f"msg done{i} on master", "  m = total", "  last"]
    return "\n".join(lines) + "\n"


def sorting_probe() -> str:
    """Three nested post chains whose inner messages land in h1's mailbox:
    m1 travels h1,h2,h3 while m2 and m3 travel h1,h3,h2, so m2 always stays
    ahead of m3 while m1 shuffles freely."""
    lines = ["vars x", "handler h0 regs z init seed", "handler h1 regs a init i1",
             "handler h2 regs a init i2", "handler h3 regs a init i3",
             "msg seed on h0", "  post h1 w1", "  post h1 w2", "  post h1 w3",
             "  last",
             "msg i1 on h1", "  last", "msg i2 on h2", "  last",
             "msg i3 on h3", "  last",
             # m1: h1 -> h2 -> h3 -> back to h1
             "msg w1 on h1", "  post h2 w1b", "  last",
             "msg w1b on h2", "  post h3 w1c", "  last",
             "msg w1c on h3", "  post h1 m1", "  last",
             # m2, m3: h1 -> h3 -> h2 -> back to h1
             "msg w2 on h1", "  post h3 w2b", "  last",
             "msg w2b on h3", "  post h2 w2c", "  last",
             "msg w2c on h2", "  post h1 m2", "  last",
             "msg w3 on h1", "  post h3 w3b", "  last",
             "msg w3b on h3", "  post h2 w3c", "  last",
             "msg w3c on h2", "  post h1 m3", "  last"]
    for i in (1, 2, 3):
        lines += [f"msg m{i} on h1", f"  a = {i}", "  x = a", "  last"]
    return "\n".join(lines) + "\n"


FAMILIES = {
    "buyers": buyers,
    "consensus": consensus,
    "counting": counting,
    "messageloop": message_loop,
    "sparsemat": sparsemat,
}
