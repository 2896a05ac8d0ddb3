import numpy as np, itertools, random
from scipy.optimize import milp, LinearConstraint, Bounds
def mom(h):
    h=np.asarray(h,float); n=h.sum(); x=np.arange(1,6)
    m=(h*x).sum()/n; v=(h*(x-m)**2).sum()/n; m3=(h*(x-m)**3).sum()/n
    return m,v,(m3/v**1.5 if v>0 else None)
def c(x,b):
    lo,l1,l2,m1,m2,h1,h2,hi=b
    if x<lo: return 0
    if l1<=x<=l2: return 1
    if m1<x<m2: return 2
    if h1<=x<=h2: return 3
    if x>hi: return 4
    return None
BM=(3.6,3.66,3.74,3.8,4.2,4.26,4.34,4.4)
BV=(0.6,0.66,0.74,0.8,1.2,1.26,1.34,1.4)
BS=(-1.3,-1.24,-1.16,-1.1,-0.6,-0.54,-0.46,-0.4)
rng=random.Random(7)
counts=[10+i//2 for i in range(14)]+[20]+[24+2*i for i in range(19)]+[70]+[76+5*i for i in range(15)]
assert len(counts)==50
N=len(counts)
nprng=np.random.default_rng(3)
cands=[]  # per item dict class->hist
for n in counts:
    d={}
    for _ in range(60000):
        a=nprng.dirichlet(nprng.uniform(0.2,3,5)*1.0)
        h=nprng.multinomial(n,a)
        m,v,s=mom(h)
        if s is None: continue
        t=(c(m,BM),c(v,BV),c(s,BS))
        if None in t: continue
        if t not in d: d[t]=tuple(int(x) for x in h)
    cands.append(d)
classes=sorted(set().union(*[d.keys() for d in cands]))
print(len(classes))
var=[(i,t) for i in range(N) for t in cands[i]]
A=[];lb=[];ub=[]
for i in range(N):
    A.append([1 if v[0]==i else 0 for v in var]); lb.append(1);ub.append(1)
need=[14,1,19,1,15]
for s in range(3):
    for k in range(5):
        A.append([1 if v[1][s]==k else 0 for v in var]); lb.append(need[k]);ub.append(need[k])
cost=np.array([nprng.random() for _ in var])
r=milp(cost,constraints=LinearConstraint(np.array(A),lb,ub),integrality=np.ones(len(var)),bounds=Bounds(0,1))
print(r.status,r.message)
sel=[var[j] for j in range(len(var)) if r.x[j]>0.5]
hs=[cands[i][t] for i,t in sel]
for h in hs: print(list(h),',')
st=np.array([mom(h) for h in hs]); cnt=np.array([sum(h) for h in hs])
def nr(vals,p): s=sorted(vals); return s[int(np.ceil(p/100*len(s)))-1]
print(nr(cnt,30),nr(cnt,70),[ (round(nr(st[:,k],30),3),round(nr(st[:,k],70),3)) for k in range(3)])
