"""Slow reference Lee thinning (2D). Usage: python3 lee_reference.py 4,3,2,1 checks lee_cases.txt."""
import numpy as np, itertools, sys
def load():
    L=open('lee_cases.txt').read().split('\n'); i=0; cases=[]
    while i<len(L) and L[i]:
        _,k,h,w=L[i].split(); h=int(h); w=int(w)
        a=np.array([[c=='1' for c in L[i+1+r]] for r in range(h)])
        b=np.array([[c=='1' for c in L[i+1+h+r]] for r in range(h)])
        cases.append((a,b)); i+=1+2*h
    return cases
def euler_quads(n):  # n: 3x3 bool; change in E8 contributed by the four 2x2 windows with center
    def e(m):
        q1=q3=qd=0
        for r in range(2):
            for c in range(2):
                w=m[r:r+2,c:c+2]; s=w.sum()
                if s==1:q1+=1
                elif s==3:q3+=1
                elif s==2 and w[0,0]==w[1,1]:qd+=1
        return q1-q3-2*qd
    m0=n.copy(); m0[1,1]=False
    return e(n)==e(m0)
def simple(n):
    m=n.copy(); m[1,1]=False
    pts=[(r,c) for r in range(3) for c in range(3) if m[r,c]]
    if not pts: return False
    seen={pts[0]}; st=[pts[0]]
    while st:
        r,c=st.pop()
        for rr in range(3):
            for cc in range(3):
                if m[rr,cc] and (rr,cc) not in seen and abs(rr-r)<=1 and abs(cc-c)<=1:
                    seen.add((rr,cc)); st.append((rr,cc))
    return len(seen)==len(pts)
def thin(img,order):
    g=np.pad(img,1).copy()
    H,W=g.shape
    dirs={1:(0,-1),2:(0,1),3:(1,0),4:(-1,0),5:None,6:None}
    unchanged=0
    while unchanged<len(order):
        unchanged=0
        for b in order:
            cand=[]
            for r in range(1,H-1):
                for c in range(1,W-1):
                    if not g[r,c]: continue
                    d=dirs[b]
                    if d is not None and g[r+d[0],c+d[1]]: continue
                    n=g[r-1:r+2,c-1:c+2]
                    if n.sum()==2: continue
                    if not euler_quads(n): continue
                    if not simple(n): continue
                    cand.append((r,c))
            ch=False
            for r,c in cand:
                if simple(g[r-1:r+2,c-1:c+2]): g[r,c]=False; ch=True
            if not ch: unchanged+=1
    return g[1:-1,1:-1]
cases=load()
orders=[list(p) for p in itertools.permutations([1,2,3,4])]
if len(sys.argv)>1: orders=[[int(x) for x in sys.argv[1].split(',')]]
for o in orders:
    ok=sum((thin(a,o)==b).all() for a,b in cases)
    print(o,ok,flush=True)
